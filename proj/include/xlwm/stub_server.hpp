#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "xlwm/translator.hpp"

namespace xlwm {

// Local machine-translation server speaking the HttpTranslator wire format,
// backed by a CipherTranslator. Test fixture for exercising the HTTP client
// contract without a real service.
class StubTranslationServer {
public:
    StubTranslationServer(std::vector<BilingualDictionary> dictionaries, NoiseModel noise,
                          std::string required_token = {});
    ~StubTranslationServer();

    StubTranslationServer(const StubTranslationServer&) = delete;
    StubTranslationServer& operator=(const StubTranslationServer&) = delete;

    // Binds 127.0.0.1 on a free port and serves on a background thread.
    void start();
    void stop();

    int port() const;
    std::string endpoint() const;  // http://127.0.0.1:<port>/translate

    // Force the next n requests to return 500, for retry tests.
    void fail_next(int n);
    std::uint64_t request_count() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace xlwm
