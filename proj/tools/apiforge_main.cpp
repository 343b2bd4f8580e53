// apiforge: induce an open action space and agent policies from how-to
// tutorials, then analyze the resulting API pool.
#include "apiforge/analytics.hpp"
#include "apiforge/corpus.hpp"
#include "apiforge/digest.hpp"
#include "apiforge/errors.hpp"
#include "apiforge/genclient.hpp"
#include "apiforge/induction.hpp"
#include "apiforge/pool.hpp"
#include "apiforge/promptgen.hpp"
#include "apiforge/retrieval.hpp"
#include "apiforge/textutil.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <memory>
#include <unistd.h>

namespace fs = std::filesystem;
using namespace apiforge;

namespace {

struct Settings {
    // inputs and outputs
    std::string corpus_path;
    std::string seed_state_path;
    std::string out_dir;
    std::vector<std::string> keep_categories;

    // run shape (defaults follow the reference setup: k=10, temperature 0
    // first, top-1 use case per API)
    std::string variant = "base-usecase-desc";
    size_t k = 10;
    int max_attempts = 3;
    std::vector<double> temperatures = {0.0, 0.3, 0.7};
    size_t sample_size = 0;
    std::uint64_t sample_seed = 0;
    int checkpoint_interval = 10;
    size_t char_budget = 90000;
    int description_override = -1;
    std::string system_asset_path;
    size_t max_steps = 0;   // 0 = unlimited
    bool log_prompts = false;
    bool force = false;

    // generation backend
    std::string backend = "live";
    std::string script_path;
    std::string replay_path;
    std::string record_path;
    std::string gen_endpoint = "https://api.openai.com";
    std::string gen_api_path = "/v1/chat/completions";
    std::string gen_model = "gpt-4-1106-preview";
    int gen_timeout = 120;
    int gen_retries = 2;

    // embedding backend
    std::string embed_backend = "local";
    std::string embed_endpoint = "https://api.openai.com";
    std::string embed_api_path = "/v1/embeddings";
    std::string embed_model = "text-embedding-ada-002";
    size_t embed_dim = 256;
    std::string embed_cache_dir;
};

// One process per run directory; the lock file is removed on scope exit.
struct DirectoryLock {
    fs::path path;
    bool owned = false;

    void acquire(const fs::path& dir) {
        path = dir / ".lock";
        if (fs::exists(path))
            throw Error("RunDirectoryLocked", path.string() +
                                                  " exists; another process owns this run "
                                                  "directory (delete it if stale)");
        write_file(path.string(), std::to_string(::getpid()) + "\n");
        owned = true;
    }
    ~DirectoryLock() {
        if (owned) {
            std::error_code ec;
            fs::remove(path, ec);
        }
    }
};

nlohmann::ordered_json settings_to_json(const Settings& s) {
    nlohmann::ordered_json doc;
    doc["corpus"] = s.corpus_path;
    doc["seed_state"] = s.seed_state_path;
    doc["out"] = s.out_dir;
    doc["keep_categories"] = s.keep_categories;
    doc["variant"] = s.variant;
    doc["k"] = s.k;
    doc["max_attempts"] = s.max_attempts;
    doc["temperature_schedule"] = s.temperatures;
    doc["sample"] = s.sample_size;
    doc["sample_seed"] = s.sample_seed;
    doc["checkpoint_interval"] = s.checkpoint_interval;
    doc["char_budget"] = s.char_budget;
    doc["description_override"] = s.description_override;
    doc["system_asset"] = s.system_asset_path;
    doc["log_prompts"] = s.log_prompts;
    doc["backend"] = s.backend;
    doc["script"] = s.script_path;
    doc["replay"] = s.replay_path;
    doc["record"] = s.record_path;
    doc["gen_endpoint"] = s.gen_endpoint;
    doc["gen_api_path"] = s.gen_api_path;
    doc["gen_model"] = s.gen_model;
    doc["gen_timeout"] = s.gen_timeout;
    doc["gen_retries"] = s.gen_retries;
    doc["embed_backend"] = s.embed_backend;
    doc["embed_endpoint"] = s.embed_endpoint;
    doc["embed_api_path"] = s.embed_api_path;
    doc["embed_model"] = s.embed_model;
    doc["embed_dim"] = s.embed_dim;
    doc["embed_cache"] = s.embed_cache_dir;
    return doc;
}

void settings_from_json(Settings& s, const nlohmann::json& doc) {
    auto get = [&doc](const char* key, auto& into) {
        if (doc.contains(key)) into = doc.at(key).get<std::decay_t<decltype(into)>>();
    };
    get("corpus", s.corpus_path);
    get("seed_state", s.seed_state_path);
    get("out", s.out_dir);
    get("keep_categories", s.keep_categories);
    get("variant", s.variant);
    get("k", s.k);
    get("max_attempts", s.max_attempts);
    get("temperature_schedule", s.temperatures);
    get("sample", s.sample_size);
    get("sample_seed", s.sample_seed);
    get("checkpoint_interval", s.checkpoint_interval);
    get("char_budget", s.char_budget);
    get("description_override", s.description_override);
    get("system_asset", s.system_asset_path);
    get("log_prompts", s.log_prompts);
    get("backend", s.backend);
    get("script", s.script_path);
    get("replay", s.replay_path);
    get("record", s.record_path);
    get("gen_endpoint", s.gen_endpoint);
    get("gen_api_path", s.gen_api_path);
    get("gen_model", s.gen_model);
    get("gen_timeout", s.gen_timeout);
    get("gen_retries", s.gen_retries);
    get("embed_backend", s.embed_backend);
    get("embed_endpoint", s.embed_endpoint);
    get("embed_api_path", s.embed_api_path);
    get("embed_model", s.embed_model);
    get("embed_dim", s.embed_dim);
    get("embed_cache", s.embed_cache_dir);
}

induction::RunConfig to_run_config(const Settings& s) {
    induction::RunConfig config;
    config.variant = promptgen::variant_from_name(s.variant);
    config.k = s.k;
    config.max_attempts = s.max_attempts;
    config.temperature_schedule = s.temperatures;
    config.sample_size = s.sample_size;
    config.sample_seed = s.sample_seed;
    config.checkpoint_interval = s.checkpoint_interval;
    config.prompt_char_budget = s.char_budget;
    config.description_override = s.description_override;
    if (!s.system_asset_path.empty()) config.system_asset = read_file(s.system_asset_path);
    return config;
}

std::unique_ptr<genclient::GenerationBackend> make_generation_backend(const Settings& s) {
    if (!s.replay_path.empty())
        return std::make_unique<genclient::ReplayBackend>(s.replay_path);

    std::shared_ptr<genclient::GenerationBackend> base;
    if (s.backend == "scripted") {
        if (s.script_path.empty())
            throw Error("InvalidArgument", "--backend scripted requires --script");
        base = std::make_shared<genclient::ScriptedBackend>(
            genclient::ScriptedBackend::from_file(s.script_path));
    } else if (s.backend == "live") {
        genclient::LiveBackendConfig config;
        config.host = s.gen_endpoint;
        config.path = s.gen_api_path;
        config.model = s.gen_model;
        config.timeout_seconds = s.gen_timeout;
        config.max_retries = s.gen_retries;
        base = genclient::make_live_backend(config);
    } else {
        throw Error("InvalidArgument", "unknown backend '" + s.backend + "'");
    }
    if (!s.record_path.empty())
        return std::make_unique<genclient::RecordingBackend>(base, s.record_path);

    struct Passthrough : genclient::GenerationBackend {
        std::shared_ptr<genclient::GenerationBackend> inner;
        std::string name() const override { return inner->name(); }
        std::string generate(const std::string& prompt, double temperature) override {
            return inner->generate(prompt, temperature);
        }
    };
    auto passthrough = std::make_unique<Passthrough>();
    passthrough->inner = base;
    return passthrough;
}

retrieval::Embedder make_embedder(const Settings& s) {
    std::shared_ptr<retrieval::EmbeddingBackend> backend;
    if (s.embed_backend == "local") {
        backend = std::make_shared<retrieval::HashingBackend>(s.embed_dim);
    } else if (s.embed_backend == "external") {
        retrieval::ExternalBackendConfig config;
        config.host = s.embed_endpoint;
        config.path = s.embed_api_path;
        config.model = s.embed_model;
        config.dimension = s.embed_dim == 256 ? 1536 : s.embed_dim;
        backend = std::shared_ptr<retrieval::EmbeddingBackend>(
            retrieval::make_external_backend(config));
    } else {
        throw Error("InvalidArgument", "unknown embedding backend '" + s.embed_backend + "'");
    }
    return retrieval::Embedder(backend, s.embed_cache_dir);
}

void write_run_outputs(const Settings& s, const induction::RunResult& result) {
    pool::persist(result.state, (fs::path(s.out_dir) / "state.json").string());
    pool::save_records(result.records, (fs::path(s.out_dir) / "records.jsonl").string());
}

int run_induction(Settings s, bool resuming) {
    if (s.out_dir.empty()) throw Error("InvalidArgument", "--out is required");
    fs::path out(s.out_dir);
    fs::path checkpoint_path = out / "checkpoint.json";
    fs::path config_echo_path = out / "config.json";

    if (resuming) {
        // The echoed config restores everything; explicit flags already won.
        if (!fs::exists(config_echo_path))
            throw Error("FileNotFound", config_echo_path.string());
        Settings echoed;
        settings_from_json(echoed, nlohmann::json::parse(read_file(config_echo_path.string())));
        echoed.out_dir = s.out_dir;
        if (!s.replay_path.empty()) echoed.replay_path = s.replay_path;
        if (!s.record_path.empty()) echoed.record_path = s.record_path;
        if (s.max_steps != 0) echoed.max_steps = s.max_steps;
        s = echoed;
    } else {
        if (fs::exists(out) && !fs::is_empty(out) && !s.force)
            throw Error("OutputDirectoryNotEmpty",
                        s.out_dir + " is not empty; pass --force to reuse it");
        fs::create_directories(out);
    }

    DirectoryLock lock;
    lock.acquire(out);

    if (!resuming)
        write_file(config_echo_path.string(), settings_to_json(s).dump(2) + "\n");

    auto corpus_data = corpus::load_corpus(
        s.corpus_path, corpus::CorpusFilter{s.keep_categories});
    pool::PoolState seed_pool = pool::load(s.seed_state_path);
    auto backend = make_generation_backend(s);
    auto embedder = make_embedder(s);
    auto config = to_run_config(s);

    std::ofstream log_file(out / "run_log.txt", resuming ? std::ios::app : std::ios::trunc);
    induction::RunHooks hooks;
    hooks.checkpoint_path = checkpoint_path.string();
    if (s.log_prompts) hooks.prompt_log_dir = (out / "prompts").string();
    if (s.max_steps != 0) hooks.max_steps = s.max_steps;
    hooks.log_line = [&log_file](const std::string& line) {
        std::cout << line << '\n';
        log_file << line << '\n';
    };

    induction::RunResult result;
    if (resuming) {
        result = induction::resume(checkpoint_path.string(), config, corpus_data, *backend,
                                   embedder, hooks);
    } else {
        result = induction::run(config, corpus_data, seed_pool, *backend, embedder, hooks);
    }
    write_run_outputs(s, result);

    int accepted = 0;
    for (const auto& record : result.records) accepted += record.accepted ? 1 : 0;
    std::cout << "processed=" << result.records.size() << " accepted=" << accepted
              << " apis=" << result.state.apis.size() << " demos="
              << result.state.demos.size()
              << (result.completed ? "" : " (stopped early; resume to continue)") << '\n';
    return 0;
}

int cmd_ingest(const Settings& s) {
    corpus::CorpusFilter filter{s.keep_categories};
    auto tutorials = corpus::load_corpus(s.corpus_path, filter);
    size_t steps = 0;
    for (const auto& t : tutorials) steps += t.steps.size();
    if (!s.out_dir.empty()) {
        std::string out;
        for (const auto& t : tutorials) out += corpus::record_to_json_line(t) + "\n";
        write_file(s.out_dir, out);
    }
    std::cout << "tutorials=" << tutorials.size() << " steps=" << steps
              << " digest=" << corpus::corpus_digest(tutorials) << '\n';
    return 0;
}

int cmd_seed(const std::vector<std::string>& annotation_paths, const std::string& out_path) {
    std::vector<std::string> files;
    for (const auto& path : annotation_paths) {
        if (fs::is_directory(path)) {
            for (const auto& entry : fs::directory_iterator(path))
                if (entry.is_regular_file()) files.push_back(entry.path().string());
        } else {
            files.push_back(path);
        }
    }
    std::sort(files.begin(), files.end());
    pool::PoolState state = pool::seed_from_annotations(files);
    pool::persist(state, out_path);
    long called = 0;
    for (const auto& [name, entry] : state.apis) called += entry.total_calls > 0 ? 1 : 0;
    std::cout << "seeded apis=" << state.apis.size() << " called=" << called
              << " demos=" << state.demos.size() << " -> " << out_path << '\n';
    return 0;
}

int cmd_stats(const std::string& state_path, const std::string& records_path,
              const std::string& out_dir, std::vector<long> thresholds, int window,
              size_t top_n, const std::string& format_name, bool export_embeddings) {
    auto format = analytics::format_from_name(format_name);
    pool::PoolState state = pool::load(state_path);
    auto records = pool::load_records(records_path);
    fs::create_directories(out_dir);

    auto curves = analytics::pool_size_curve(records, state.demos, thresholds);
    for (const auto& [threshold, curve] : curves)
        write_file((fs::path(out_dir) / ("pool_size_t" + std::to_string(threshold) + ".csv"))
                       .string(),
                   analytics::curve_to_csv(curve));

    int last_step = records.empty() ? 0 : records.back().step;
    auto series = analytics::induction_ratio_series(records, window);
    write_file((fs::path(out_dir) / "induction_ratio.csv").string(),
               analytics::ratio_series_to_csv(series, last_step));

    auto table = analytics::frequency_table(state, top_n);
    std::string stem = "frequency_top" + std::to_string(top_n);
    write_file((fs::path(out_dir) / (stem + ".csv")).string(),
               analytics::frequency_to_csv(table));
    if (format == analytics::ExportFormat::Svg)
        write_file((fs::path(out_dir) / (stem + ".svg")).string(),
                   analytics::frequency_to_svg(table));

    if (export_embeddings) {
        retrieval::Embedder embedder(std::make_shared<retrieval::HashingBackend>(256));
        write_file((fs::path(out_dir) / "api_embeddings.csv").string(),
                   analytics::api_embeddings_csv(state, embedder));
    }

    std::cout << "wrote " << curves.size() << " pool-size curves, induction_ratio.csv, "
              << stem << ".csv" << (format == analytics::ExportFormat::Svg ? ", " + stem +
                                                                                 ".svg"
                                                                           : "")
              << " under " << out_dir << '\n';
    return 0;
}

int cmd_compare(const std::string& state_path, const std::string& mapping_path, size_t top_n,
                const std::string& out_path) {
    pool::PoolState state = pool::load(state_path);
    auto table = analytics::frequency_table(state, top_n);
    auto mapping = analytics::load_coverage_mapping(mapping_path);
    auto report = analytics::coverage_compare(table, mapping);

    std::string annotated = "api,total_calls,covered\n";
    for (const auto& row : report.rows)
        annotated += row.api + ',' + std::to_string(row.total_calls) + ',' +
                     (row.covered ? "1" : "0") + '\n';
    if (!out_path.empty()) write_file(out_path, annotated);

    std::cout << "covered " << report.covered << "/" << report.total << '\n';
    return 0;
}

// Sequential console scoring; blank input skips an item, EOF stops cleanly.
int cmd_annotate(const std::string& records_path, const std::string& corpus_path,
                 const std::string& variant, const std::string& mode,
                 const std::vector<std::string>& ranking_variants,
                 const std::string& out_path) {
    auto records = pool::load_records(records_path);
    auto tutorials = corpus::load_corpus(corpus_path);
    auto find_tutorial = [&](const std::string& id) -> const corpus::Tutorial* {
        for (const auto& t : tutorials)
            if (t.id == id) return &t;
        return nullptr;
    };
    auto ask = [](const std::string& prompt, std::string& answer) {
        std::cout << prompt << std::flush;
        return static_cast<bool>(std::getline(std::cin, answer));
    };
    auto parse_score = [](const std::string& text) {
        if (text == "0") return 0.0;
        if (text == "0.5") return 0.5;
        if (text == "1") return 1.0;
        throw Error("InvalidScore", "'" + text + "' (expected 0, 0.5, or 1)");
    };

    size_t written = 0;
    if (mode == "redundancy") {
        for (const auto& record : records) {
            for (const auto& api : record.new_apis) {
                std::string answer;
                if (!ask("redundancy of '" + api + "' [0|0.5|1]: ", answer)) goto done;
                if (trim(answer).empty()) continue;
                double score = parse_score(trim(answer));
                nlohmann::ordered_json doc;
                doc["type"] = "redundancy";
                doc["variant"] = variant;
                doc["api_name"] = api;
                doc["score"] = score;
                if (score == 0.5) {
                    std::string tags;
                    if (!ask("tags for '" + api + "' [complex,synonym|empty]: ", tags))
                        goto done;
                    auto tag_list = nlohmann::ordered_json::array();
                    for (const auto& token : tokenize_words(tags)) tag_list.push_back(token);
                    doc["tags"] = tag_list;
                }
                analytics::append_annotation_line(out_path, doc.dump());
                ++written;
            }
        }
    } else if (mode == "faithfulness") {
        for (const auto& record : records) {
            if (!record.accepted) continue;
            const auto* tutorial = find_tutorial(record.tutorial_id);
            if (!tutorial) continue;
            for (const auto& step : tutorial->steps) {
                std::string answer;
                if (!ask("faithfulness of " + record.tutorial_id + " step " +
                             std::to_string(step.index) + " [0|0.5|1]: ",
                         answer))
                    goto done;
                if (trim(answer).empty()) continue;
                nlohmann::ordered_json doc;
                doc["type"] = "faithfulness";
                doc["variant"] = variant;
                doc["tutorial_id"] = record.tutorial_id;
                doc["step"] = step.index;
                doc["score"] = parse_score(trim(answer));
                analytics::append_annotation_line(out_path, doc.dump());
                ++written;
            }
        }
    } else if (mode == "ranking") {
        if (ranking_variants.size() < 2)
            throw Error("InvalidArgument", "--variants needs at least two names");
        for (const auto& record : records) {
            if (!record.accepted) continue;
            const auto* tutorial = find_tutorial(record.tutorial_id);
            if (!tutorial) continue;
            for (const auto& step : tutorial->steps) {
                nlohmann::ordered_json ranks;
                bool complete = true;
                for (const auto& name : ranking_variants) {
                    std::string answer;
                    if (!ask("rank of " + name + " for " + record.tutorial_id + " step " +
                                 std::to_string(step.index) + " [1.." +
                                 std::to_string(ranking_variants.size()) + "]: ",
                             answer))
                        goto done;
                    if (trim(answer).empty()) {
                        complete = false;
                        break;
                    }
                    ranks[name] = std::stod(trim(answer));
                }
                if (!complete) continue;
                nlohmann::ordered_json doc;
                doc["type"] = "ranking";
                doc["tutorial_id"] = record.tutorial_id;
                doc["step"] = step.index;
                doc["ranks"] = ranks;
                analytics::append_annotation_line(out_path, doc.dump());
                ++written;
            }
        }
    } else {
        throw Error("InvalidArgument", "unknown annotate mode '" + mode + "'");
    }
done:
    std::cout << "wrote " << written << " annotation records to " << out_path << '\n';
    return 0;
}

int cmd_report(const std::vector<std::string>& annotation_paths,
               const std::vector<std::string>& record_specs, const std::string& out_path) {
    auto annotations = analytics::load_annotations(annotation_paths);
    std::map<std::string, std::vector<pool::InductionRecord>> records_by_variant;
    for (const auto& spec : record_specs) {
        size_t eq = spec.find('=');
        if (eq == std::string::npos)
            throw Error("InvalidArgument", "--records expects <variant>=<records.jsonl>");
        records_by_variant[spec.substr(0, eq)] = pool::load_records(spec.substr(eq + 1));
    }
    auto rows = analytics::human_eval_report(annotations, records_by_variant);
    std::cout << analytics::render_report(rows);
    if (!out_path.empty()) write_file(out_path, analytics::report_to_csv(rows));
    return 0;
}

std::string find_config_path(int argc, char** argv) {
    for (int i = 1; i + 1 < argc; ++i)
        if (std::string(argv[i]) == "--config") return argv[i + 1];
    return "";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"apiforge: grow a primitive-action API pool and agent programs "
                 "from how-to tutorials"};
    app.require_subcommand(1);

    Settings settings;
    std::string config_path = find_config_path(argc, argv);
    try {
        if (!config_path.empty())
            settings_from_json(settings, nlohmann::json::parse(read_file(config_path)));
    } catch (const std::exception& e) {
        std::cerr << "error: BadConfig: " << e.what() << '\n';
        return 2;
    }
    std::string config_path_opt;   // parsed but already consumed above

    auto add_common_run_options = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path_opt, "JSON config file (flags override it)");
        cmd->add_option("--corpus", settings.corpus_path, "line-delimited tutorial corpus");
        cmd->add_option("--seed-state", settings.seed_state_path,
                        "seed pool state from the seed subcommand");
        cmd->add_option("--out", settings.out_dir, "run output directory");
        cmd->add_option("--variant", settings.variant,
                        "base | base-usecase | base-usecase-desc")
            ->capture_default_str();
        cmd->add_option("--k", settings.k, "retrieved full-program demonstrations")
            ->capture_default_str();
        cmd->add_option("--max-attempts", settings.max_attempts,
                        "generation attempts per tutorial")
            ->capture_default_str();
        cmd->add_option("--temperature-schedule", settings.temperatures,
                        "per-attempt sampling temperatures")
            ->delimiter(',')
            ->capture_default_str();
        cmd->add_option("--sample", settings.sample_size,
                        "tutorials to sample (0 = whole corpus)")
            ->capture_default_str();
        cmd->add_option("--sample-seed", settings.sample_seed, "sampling seed")
            ->capture_default_str();
        cmd->add_option("--checkpoint-interval", settings.checkpoint_interval,
                        "steps between checkpoints")
            ->capture_default_str();
        cmd->add_option("--char-budget", settings.char_budget, "soft prompt budget")
            ->capture_default_str();
        cmd->add_flag_callback(
            "--include-descriptions",
            [&settings] { settings.description_override = 1; },
            "force step descriptions into prompts and retrieval keys");
        cmd->add_flag_callback(
            "--exclude-descriptions",
            [&settings] { settings.description_override = 0; },
            "force step descriptions out of prompts and retrieval keys");
        cmd->add_option("--system-asset", settings.system_asset_path,
                        "file overriding the built-in system instructions");
        cmd->add_option("--max-steps", settings.max_steps,
                        "stop after this many tutorials (0 = all); resumable");
        cmd->add_flag("--log-prompts", settings.log_prompts,
                      "write each step's prompt under <out>/prompts/");
        cmd->add_option("--backend", settings.backend, "live | scripted")
            ->capture_default_str();
        cmd->add_option("--script", settings.script_path,
                        "completions file for the scripted backend");
        cmd->add_option("--replay", settings.replay_path,
                        "replay a recorded cassette instead of any backend");
        cmd->add_option("--record", settings.record_path,
                        "record every generation exchange to this cassette");
        cmd->add_option("--gen-endpoint", settings.gen_endpoint, "chat-completion endpoint host")
            ->capture_default_str();
        cmd->add_option("--gen-model", settings.gen_model, "generation model id")
            ->capture_default_str();
        cmd->add_option("--embed-backend", settings.embed_backend, "local | external")
            ->capture_default_str();
        cmd->add_option("--embed-endpoint", settings.embed_endpoint, "embedding host")
            ->capture_default_str();
        cmd->add_option("--embed-model", settings.embed_model, "embedding model id")
            ->capture_default_str();
        cmd->add_option("--embed-dim", settings.embed_dim, "embedding dimension")
            ->capture_default_str();
        cmd->add_option("--embed-cache", settings.embed_cache_dir,
                        "on-disk embedding cache directory");
    };

    // ingest
    auto* ingest = app.add_subcommand("ingest", "validate and normalize a tutorial corpus");
    ingest->add_option("--corpus", settings.corpus_path, "corpus file to validate")
        ->required();
    ingest->add_option("--out", settings.out_dir, "write the normalized corpus here");
    ingest->add_option("--keep-category", settings.keep_categories,
                       "keep tutorials whose category path contains this entry (repeatable)");

    // seed
    auto* seed = app.add_subcommand("seed", "build the seed pool from annotation files");
    std::vector<std::string> annotation_inputs;
    std::string seed_out;
    seed->add_option("--annotations", annotation_inputs,
                     "seed demonstration files or directories")
        ->required();
    seed->add_option("--out", seed_out, "state file to write")->required();

    // run / resume
    auto* run_cmd = app.add_subcommand("run", "run the induction loop over a corpus sample");
    add_common_run_options(run_cmd);
    run_cmd->add_flag("--force", settings.force, "reuse a non-empty output directory");
    auto* resume_cmd =
        app.add_subcommand("resume", "continue a checkpointed run in --out");
    add_common_run_options(resume_cmd);

    // stats
    auto* stats = app.add_subcommand("stats", "export pool-size, ratio, and frequency data");
    std::string stats_state, stats_records, stats_out;
    std::vector<long> thresholds = {1, 2, 3, 5, 10};
    int window = 50;
    size_t top_n = 50;
    std::string format_name = "svg";
    stats->add_option("--state", stats_state, "state file")->required();
    stats->add_option("--records", stats_records, "records file")->required();
    stats->add_option("--out", stats_out, "output directory")->required();
    stats->add_option("--thresholds", thresholds, "frequency thresholds for pool-size curves")
        ->delimiter(',')
        ->capture_default_str();
    stats->add_option("--window", window, "look-ahead window for the ratio moving average")
        ->capture_default_str();
    stats->add_option("--top", top_n, "frequency table rows")->capture_default_str();
    stats->add_option("--format", format_name, "csv | svg (svg also writes the csv files)")
        ->capture_default_str();
    bool export_embeddings = false;
    stats->add_flag("--embeddings", export_embeddings,
                    "also write api_embeddings.csv for external projection tools");

    // compare
    auto* compare = app.add_subcommand("compare", "coverage of the top APIs in a mapping");
    std::string compare_state, mapping_path, compare_out;
    size_t compare_top = 50;
    compare->add_option("--state", compare_state, "state file")->required();
    compare->add_option("--mapping", mapping_path, "two-column api/covered mapping")
        ->required();
    compare->add_option("--top", compare_top, "frequency table rows")->capture_default_str();
    compare->add_option("--out", compare_out, "write the annotated table here");

    // annotate
    auto* annotate = app.add_subcommand("annotate", "score induction output interactively");
    std::string ann_records, ann_corpus, ann_variant = "base-usecase-desc";
    std::string ann_mode = "redundancy", ann_out;
    std::vector<std::string> ranking_variants = {"base", "base-usecase", "base-usecase-desc"};
    annotate->add_option("--records", ann_records, "records file of the run")->required();
    annotate->add_option("--corpus", ann_corpus, "corpus the run sampled from")->required();
    annotate->add_option("--variant", ann_variant, "variant the records belong to")
        ->capture_default_str();
    annotate->add_option("--mode", ann_mode, "redundancy | faithfulness | ranking")
        ->capture_default_str();
    annotate->add_option("--variants", ranking_variants, "variant names for ranking mode")
        ->delimiter(',')
        ->capture_default_str();
    annotate->add_option("--out", ann_out, "annotation file to append to")->required();

    // report
    auto* report = app.add_subcommand("report", "aggregate human-evaluation annotations");
    std::vector<std::string> report_annotations, report_records;
    std::string report_out;
    report->add_option("--annotations", report_annotations, "annotation files")->required();
    report->add_option("--records", report_records,
                       "<variant>=<records.jsonl>, repeatable");
    report->add_option("--out", report_out, "also write the table as csv");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (app.got_subcommand(ingest)) return cmd_ingest(settings);
        if (app.got_subcommand(seed)) return cmd_seed(annotation_inputs, seed_out);
        if (app.got_subcommand(run_cmd)) return run_induction(settings, false);
        if (app.got_subcommand(resume_cmd)) return run_induction(settings, true);
        if (app.got_subcommand(stats))
            return cmd_stats(stats_state, stats_records, stats_out, thresholds, window, top_n,
                             format_name, export_embeddings);
        if (app.got_subcommand(compare))
            return cmd_compare(compare_state, mapping_path, compare_top, compare_out);
        if (app.got_subcommand(annotate))
            return cmd_annotate(ann_records, ann_corpus, ann_variant, ann_mode,
                                ranking_variants, ann_out);
        if (app.got_subcommand(report))
            return cmd_report(report_annotations, report_records, report_out);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: Unhandled: " << e.what() << '\n';
        return 1;
    }
    return 2;
}
