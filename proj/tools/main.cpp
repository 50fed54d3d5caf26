// Command-line front end: vocabulary/cluster/model building, watermarked
// generation, translation attacks, detection, calibration and the full
// experiment runner. Exit codes: 0 success, 1 validation error, 2 runtime
// failure.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "xlwm/clusters.hpp"
#include "xlwm/error.hpp"
#include "xlwm/experiment.hpp"
#include "xlwm/metrics.hpp"
#include "xlwm/ngram.hpp"
#include "xlwm/rng.hpp"
#include "xlwm/steam.hpp"
#include "xlwm/translator.hpp"
#include "xlwm/vocab.hpp"
#include "xlwm/watermark.hpp"

namespace {

using namespace xlwm;

std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("io-error", "cannot read " + path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) lines.push_back(line);
    }
    return lines;
}

void write_lines(const std::string& path, const std::vector<std::string>& lines) {
    std::ofstream out(path);
    if (!out) throw Error("io-error", "cannot write " + path);
    for (const std::string& line : lines) out << line << "\n";
}

WatermarkParams params_from_cli(const std::string& params_path, std::uint64_t key,
                                double gamma, double delta, std::uint32_t width) {
    if (!params_path.empty()) return WatermarkParams::load(params_path);
    WatermarkParams params;
    params.key = key;
    params.gamma = gamma;
    params.delta = delta;
    params.context_width = width;
    params.validate();
    return params;
}

struct DetectorArgs {
    std::string vocab_path;
    std::string params_path;
    std::string clusters_path;
    std::string domain = "token";
    std::uint64_t key = 0;
    double gamma = 0.25;
    double delta = 2.0;
    std::uint32_t context_width = 1;

    void attach(CLI::App* cmd) {
        cmd->add_option("--vocab", vocab_path, "vocabulary JSON")->required();
        cmd->add_option("--params", params_path, "watermark params JSON");
        cmd->add_option("--clusters", clusters_path, "cluster map JSON");
        cmd->add_option("--domain", domain, "token|cluster");
        cmd->add_option("--key", key, "watermark key");
        cmd->add_option("--gamma", gamma, "green fraction");
        cmd->add_option("--delta", delta, "logit bias");
        cmd->add_option("--context-width", context_width, "seed context width");
    }
};

int run(int argc, char** argv) {
    CLI::App app{"multilingual watermarking toolkit"};
    app.require_subcommand(1);

    // vocab build
    auto* vocab_cmd = app.add_subcommand("vocab", "vocabulary operations");
    vocab_cmd->require_subcommand(1);
    auto* vocab_build = vocab_cmd->add_subcommand("build", "build a vocabulary from a corpus");
    std::string corpus_path, out_path;
    std::size_t min_word_freq = 1, max_words = 1000000;
    vocab_build->add_option("--corpus", corpus_path, "one document per line")->required();
    vocab_build->add_option("--min-word-freq", min_word_freq, "full-word frequency floor");
    vocab_build->add_option("--max-words", max_words, "full-word cap");
    vocab_build->add_option("--out", out_path, "output vocabulary JSON")->required();
    vocab_build->callback([&] {
        Vocabulary::build(read_lines(corpus_path), min_word_freq, max_words).save(out_path);
    });

    // clusters build
    auto* clusters_cmd = app.add_subcommand("clusters", "semantic cluster operations");
    clusters_cmd->require_subcommand(1);
    auto* clusters_build =
        clusters_cmd->add_subcommand("build", "build a cluster map from dictionaries");
    std::string cb_vocab, cb_out;
    std::vector<std::string> cb_dicts;  // src:tgt:path triples
    clusters_build->add_option("--vocab", cb_vocab, "vocabulary JSON")->required();
    clusters_build
        ->add_option("--dict", cb_dicts, "dictionary as <src>:<tgt>:<path>, repeatable")
        ->required();
    clusters_build->add_option("--out", cb_out, "output cluster map JSON")->required();
    clusters_build->callback([&] {
        const Vocabulary vocab = Vocabulary::load(cb_vocab);
        std::vector<BilingualDictionary> dicts;
        for (const std::string& spec : cb_dicts) {
            const auto first = spec.find(':');
            const auto second = spec.find(':', first + 1);
            if (first == std::string::npos || second == std::string::npos) {
                throw Error("bad-arguments", "--dict expects <src>:<tgt>:<path>");
            }
            dicts.push_back(BilingualDictionary::load_muse(spec.substr(second + 1),
                                                           spec.substr(0, first),
                                                           spec.substr(first + 1,
                                                                       second - first - 1)));
        }
        const SemanticGraph graph = build_graph(vocab, dicts);
        const LouvainResult result = louvain(graph);
        complete_cluster_map(vocab, result.communities).save(cb_out);
        std::cout << "nodes=" << graph.node_count()
                  << " dropped_pairs=" << graph.dropped_pairs
                  << " communities=" << result.communities.size() << "\n";
    });

    // lm train
    auto* lm_cmd = app.add_subcommand("lm", "language model operations");
    lm_cmd->require_subcommand(1);
    auto* lm_train = lm_cmd->add_subcommand("train", "train an n-gram model");
    std::string lm_corpus, lm_vocab, lm_out;
    std::uint32_t lm_order = 2;
    lm_train->add_option("--corpus", lm_corpus, "one document per line")->required();
    lm_train->add_option("--vocab", lm_vocab, "vocabulary JSON")->required();
    lm_train->add_option("--order", lm_order, "n-gram order");
    lm_train->add_option("--out", lm_out, "output model JSON")->required();
    lm_train->callback([&] {
        NGramModel::train(read_lines(lm_corpus), Vocabulary::load(lm_vocab), lm_order)
            .save(lm_out);
    });

    // generate
    auto* gen_cmd = app.add_subcommand("generate", "sample continuations from a model");
    std::string gen_model, gen_vocab, gen_prompts, gen_out, gen_lang = "en";
    DetectorArgs gen_wm;
    bool gen_watermark = false;
    std::size_t gen_tokens = 200;
    std::uint64_t gen_seed = 0;
    double gen_temperature = 1.0;
    gen_cmd->add_option("--model", gen_model, "model JSON")->required();
    gen_cmd->add_option("--prompts", gen_prompts, "one prompt per line")->required();
    gen_cmd->add_option("--out", gen_out, "output text file")->required();
    gen_cmd->add_option("--language", gen_lang, "prompt language tag");
    gen_cmd->add_option("--max-tokens", gen_tokens, "tokens to generate");
    gen_cmd->add_option("--seed", gen_seed, "sampling seed");
    gen_cmd->add_option("--temperature", gen_temperature, "softmax temperature");
    gen_cmd->add_flag("--watermark", gen_watermark, "embed the watermark");
    gen_wm.attach(gen_cmd);
    gen_cmd->callback([&] {
        const Vocabulary vocab = Vocabulary::load(gen_wm.vocab_path);
        const NGramModel model = NGramModel::load(gen_model);
        ClusterMap clusters;
        GenerationConfig cfg;
        cfg.max_tokens = gen_tokens;
        cfg.temperature = gen_temperature;
        if (gen_watermark) {
            cfg.watermark = params_from_cli(gen_wm.params_path, gen_wm.key, gen_wm.gamma,
                                            gen_wm.delta, gen_wm.context_width);
            if (gen_wm.domain == "cluster") {
                clusters = ClusterMap::load(gen_wm.clusters_path);
                cfg.domain = Domain::Cluster;
                cfg.clusters = &clusters;
            }
        }
        std::vector<std::string> outputs;
        std::size_t index = 0;
        for (const std::string& prompt_text : read_lines(gen_prompts)) {
            cfg.sample_seed = mix64(gen_seed ^ index++);
            const TokenSequence prompt = tokenize(vocab, prompt_text, gen_lang);
            outputs.push_back(detokenize(vocab, generate(model, prompt, cfg)));
        }
        write_lines(gen_out, outputs);
    });

    // attack
    auto* attack_cmd = app.add_subcommand("attack", "apply a translation attack");
    std::string at_translator, at_in, at_out, at_kind = "direct", at_src = "en", at_tgt,
                at_pivot;
    attack_cmd->add_option("--translator", at_translator, "translator spec JSON")->required();
    attack_cmd->add_option("--in", at_in, "input texts, one per line")->required();
    attack_cmd->add_option("--out", at_out, "output texts")->required();
    attack_cmd->add_option("--kind", at_kind, "direct|pivot|cwra");
    attack_cmd->add_option("--src", at_src, "source language");
    attack_cmd->add_option("--tgt", at_tgt, "target language")->required();
    attack_cmd->add_option("--pivot", at_pivot, "pivot language");
    attack_cmd->callback([&] {
        AttackSpec spec;
        spec.kind = at_kind == "direct"  ? AttackSpec::Kind::Direct
                    : at_kind == "pivot" ? AttackSpec::Kind::Pivot
                    : at_kind == "cwra"  ? AttackSpec::Kind::Cwra
                                         : throw Error("bad-arguments", "unknown attack kind");
        spec.source_language = at_src;
        spec.target_language = at_tgt;
        spec.pivot_language = at_pivot;
        spec.validate();
        auto translator = make_translator(TranslatorSpec::load(at_translator));
        std::vector<std::string> outputs;
        for (const std::string& text : read_lines(at_in)) {
            outputs.push_back(apply_attack(*translator, spec, text));
        }
        write_lines(at_out, outputs);
    });

    // detect
    auto* detect_cmd = app.add_subcommand("detect", "score texts with the z-statistic");
    DetectorArgs det;
    std::string det_in, det_out, det_lang = "en";
    detect_cmd->add_option("--in", det_in, "input texts, one per line")->required();
    detect_cmd->add_option("--out", det_out, "output CSV (language,T,g,z)")->required();
    detect_cmd->add_option("--language", det_lang, "text language tag");
    det.attach(detect_cmd);
    detect_cmd->callback([&] {
        const Vocabulary vocab = Vocabulary::load(det.vocab_path);
        ClusterMap clusters;
        DetectorConfig detector{&vocab,
                                params_from_cli(det.params_path, det.key, det.gamma,
                                                det.delta, det.context_width),
                                Domain::Token, nullptr};
        if (det.domain == "cluster") {
            clusters = ClusterMap::load(det.clusters_path);
            detector.domain = Domain::Cluster;
            detector.clusters = &clusters;
        }
        std::ofstream out(det_out);
        if (!out) throw Error("io-error", "cannot write " + det_out);
        out << "language,scored,green,z\n";
        for (const std::string& text : read_lines(det_in)) {
            const DetectionResult r = detector.score_text(text, det_lang);
            out << det_lang << ',' << r.scored_tokens << ',' << r.green_hits << ','
                << r.z << "\n";
        }
    });

    // calibrate
    auto* cal_cmd = app.add_subcommand("calibrate", "per-language z-score calibration");
    DetectorArgs cal;
    std::string cal_translator, cal_corpus, cal_lang = "en", cal_out;
    std::vector<std::string> cal_pool;
    std::size_t cal_n = 50;
    cal_cmd->add_option("--translator", cal_translator, "translator spec JSON")->required();
    cal_cmd->add_option("--corpus", cal_corpus, "human texts, one per line")->required();
    cal_cmd->add_option("--corpus-lang", cal_lang, "corpus language tag");
    cal_cmd->add_option("--pool", cal_pool, "language pool")->required();
    cal_cmd->add_option("--n", cal_n, "calibration texts per language");
    cal_cmd->add_option("--out", cal_out, "output profile JSON")->required();
    cal.attach(cal_cmd);
    cal_cmd->callback([&] {
        const Vocabulary vocab = Vocabulary::load(cal.vocab_path);
        ClusterMap clusters;
        DetectorConfig detector{&vocab,
                                params_from_cli(cal.params_path, cal.key, cal.gamma,
                                                cal.delta, cal.context_width),
                                Domain::Token, nullptr};
        if (cal.domain == "cluster") {
            clusters = ClusterMap::load(cal.clusters_path);
            detector.domain = Domain::Cluster;
            detector.clusters = &clusters;
        }
        auto translator = make_translator(TranslatorSpec::load(cal_translator));
        calibrate(detector, *translator, read_lines(cal_corpus), cal_lang, cal_pool, cal_n)
            .save(cal_out);
    });

    // steam-detect
    auto* steam_cmd = app.add_subcommand("steam-detect",
                                         "back-translation detection with normalization");
    DetectorArgs sd;
    std::string sd_translator, sd_profile, sd_in, sd_out, sd_lang;
    std::vector<std::string> sd_pool;
    steam_cmd->add_option("--translator", sd_translator, "translator spec JSON")->required();
    steam_cmd->add_option("--profile", sd_profile, "calibration profile JSON")->required();
    steam_cmd->add_option("--in", sd_in, "suspect texts, one per line")->required();
    steam_cmd->add_option("--lang", sd_lang, "suspect language tag")->required();
    steam_cmd->add_option("--pool", sd_pool, "back-translation pool")->required();
    steam_cmd->add_option("--out", sd_out, "output CSV")->required();
    sd.attach(steam_cmd);
    steam_cmd->callback([&] {
        const Vocabulary vocab = Vocabulary::load(sd.vocab_path);
        DetectorConfig detector{&vocab,
                                params_from_cli(sd.params_path, sd.key, sd.gamma, sd.delta,
                                                sd.context_width),
                                Domain::Token, nullptr};
        auto translator = make_translator(TranslatorSpec::load(sd_translator));
        const LanguageProfile profile = LanguageProfile::load(sd_profile);
        std::ofstream out(sd_out);
        if (!out) throw Error("io-error", "cannot write " + sd_out);
        out << "best_language,best_score\n";
        for (const std::string& text : read_lines(sd_in)) {
            const SteamVerdict verdict =
                steam_score(detector, *translator, profile, text, sd_lang, sd_pool);
            out << verdict.best_language << ',' << verdict.best_score << "\n";
        }
    });

    // eval run
    auto* eval_cmd = app.add_subcommand("eval", "experiment runner");
    eval_cmd->require_subcommand(1);
    auto* eval_run = eval_cmd->add_subcommand("run", "run the configured experiment grid");
    std::string ev_config, ev_out;
    std::optional<std::uint64_t> ev_seed;
    eval_run->add_option("--config", ev_config, "experiment config JSON")->required();
    eval_run->add_option("--out", ev_out, "output directory override");
    eval_run->add_option("--seed", ev_seed, "seed override");
    eval_run->callback([&] {
        ExperimentConfig config = ExperimentConfig::load(ev_config);
        if (!ev_out.empty()) config.out_dir = ev_out;
        if (ev_seed) config.seed = *ev_seed;
        const Report report = run_experiment(config);
        std::size_t failed = 0;
        for (const ConditionResult& r : report.results) failed += r.failed ? 1 : 0;
        std::cout << "conditions=" << report.results.size() << " failed=" << failed
                  << " out=" << config.out_dir << "\n";
        if (failed > 0) throw Error("condition-failed",
                                    std::to_string(failed) + " conditions failed");
    });

    // report render
    auto* report_cmd = app.add_subcommand("report", "report tools");
    report_cmd->require_subcommand(1);
    auto* report_render = report_cmd->add_subcommand("render", "render report.json as a table");
    std::string rr_in, rr_out;
    report_render->add_option("--in", rr_in, "report.json")->required();
    report_render->add_option("--out", rr_out, "output file (default stdout)");
    report_render->callback([&] {
        std::ifstream in(rr_in);
        if (!in) throw Error("io-error", "cannot read " + rr_in);
        nlohmann::json j;
        in >> j;
        const std::string table = render_report(j);
        if (rr_out.empty()) {
            std::cout << table;
        } else {
            std::ofstream out(rr_out);
            if (!out) throw Error("io-error", "cannot write " + rr_out);
            out << table;
        }
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;  // flag/subcommand validation error
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        // Config and argument problems are validation failures (exit 1);
        // everything else is a runtime failure (exit 2).
        if (e.code() == "invalid-config" || e.code() == "bad-arguments" ||
            e.code() == "bad-params") {
            return 1;
        }
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
