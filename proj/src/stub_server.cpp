#include "xlwm/stub_server.hpp"

#include <atomic>
#include <thread>

#include "httplib.h"
#include "json.hpp"

#include "xlwm/error.hpp"

namespace xlwm {

struct StubTranslationServer::Impl {
    CipherTranslator cipher;
    std::string required_token;
    httplib::Server server;
    std::thread thread;
    int port = 0;
    std::atomic<int> fail_budget{0};
    std::atomic<std::uint64_t> requests{0};

    Impl(std::vector<BilingualDictionary> dicts, NoiseModel noise, std::string token)
        : cipher(std::move(dicts), noise), required_token(std::move(token)) {}
};

StubTranslationServer::StubTranslationServer(std::vector<BilingualDictionary> dictionaries,
                                             NoiseModel noise, std::string required_token)
    : impl_(std::make_unique<Impl>(std::move(dictionaries), noise,
                                   std::move(required_token))) {
    impl_->server.Post("/translate", [this](const httplib::Request& req,
                                            httplib::Response& res) {
        impl_->requests.fetch_add(1);
        if (impl_->fail_budget.fetch_sub(1) > 0) {
            res.status = 500;
            res.set_content(R"({"error":"injected failure"})", "application/json");
            return;
        }
        impl_->fail_budget.store(0);

        if (!impl_->required_token.empty()) {
            const std::string expected = "Bearer " + impl_->required_token;
            if (req.get_header_value("Authorization") != expected) {
                res.status = 401;
                res.set_content(R"({"error":"unauthorized"})", "application/json");
                return;
            }
        }

        try {
            const nlohmann::json body = nlohmann::json::parse(req.body);
            const std::string translated = impl_->cipher.translate(
                body.at("q").get<std::string>(), body.at("source").get<std::string>(),
                body.at("target").get<std::string>());
            res.set_content(nlohmann::json({{"translatedText", translated}}).dump(),
                            "application/json");
        } catch (const Error& e) {
            res.status = 400;
            res.set_content(nlohmann::json({{"error", e.code()}}).dump(),
                            "application/json");
        } catch (const std::exception& e) {
            res.status = 400;
            res.set_content(nlohmann::json({{"error", e.what()}}).dump(),
                            "application/json");
        }
    });
}

StubTranslationServer::~StubTranslationServer() { stop(); }

void StubTranslationServer::start() {
    impl_->port = impl_->server.bind_to_any_port("127.0.0.1");
    if (impl_->port <= 0) throw Error("io-error", "stub server could not bind a port");
    impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
}

void StubTranslationServer::stop() {
    if (impl_->thread.joinable()) {
        impl_->server.stop();
        impl_->thread.join();
    }
}

int StubTranslationServer::port() const { return impl_->port; }

std::string StubTranslationServer::endpoint() const {
    return "http://127.0.0.1:" + std::to_string(impl_->port) + "/translate";
}

void StubTranslationServer::fail_next(int n) { impl_->fail_budget.store(n); }

std::uint64_t StubTranslationServer::request_count() const { return impl_->requests.load(); }

}  // namespace xlwm
