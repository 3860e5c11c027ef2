// povqa: build, curate, evaluate, and analyze multiple-choice QA benchmarks
// derived from time-synchronized gameplay annotation timelines.
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "povqa/annotation.hpp"
#include "povqa/clients.hpp"
#include "povqa/curation.hpp"
#include "povqa/eval.hpp"
#include "povqa/generator.hpp"
#include "povqa/report.hpp"
#include "povqa/rng.hpp"
#include "povqa/taxonomy.hpp"

namespace fs = std::filesystem;
using namespace povqa;

namespace {

#ifndef POVQA_VERSION
#define POVQA_VERSION "0.0.0"
#endif

// ---------------------------------------------------------------------------
// small IO helpers

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::string& path, const std::string& bytes) {
    if (auto parent = fs::path(path).parent_path(); !parent.empty()) fs::create_directories(parent);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << bytes;
}

json manifest_line(uint64_t seed, const json& effective_config) {
    return json{{"_manifest", json{{"tool_version", POVQA_VERSION},
                                   {"seed", seed},
                                   {"config_hash", canonical_hash(effective_config)}}}};
}

// JSONL rows (manifest lines skipped)
std::vector<json> read_jsonl(const std::string& path) {
    std::istringstream in(read_file(path));
    std::vector<json> rows;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json doc;
        try {
            doc = json::parse(line);
        } catch (const json::exception& e) {
            throw std::runtime_error(path + ":" + std::to_string(line_no) + ": " + e.what());
        }
        if (doc.is_object() && doc.contains("_manifest")) continue;
        rows.push_back(std::move(doc));
    }
    return rows;
}

void write_jsonl(const std::string& path, const json& manifest, const std::vector<json>& rows) {
    std::string out = canonical_line(manifest);
    for (const auto& row : rows) out += canonical_line(row);
    write_file(path, out);
}

std::vector<AnnotationInstance> load_instances(const std::string& path) {
    std::vector<AnnotationInstance> out;
    auto load_file = [&](const std::string& file) {
        if (fs::path(file).extension() == ".jsonl") {
            for (const auto& doc : read_jsonl(file)) out.push_back(instance_from_json(doc));
            return;
        }
        json doc = json::parse(read_file(file));
        if (doc.is_array())
            for (const auto& one : doc) out.push_back(instance_from_json(one));
        else
            out.push_back(instance_from_json(doc));
    };
    if (fs::is_directory(path)) {
        std::vector<std::string> files;
        for (const auto& entry : fs::directory_iterator(path)) {
            auto ext = entry.path().extension();
            if (entry.is_regular_file() && (ext == ".json" || ext == ".jsonl"))
                files.push_back(entry.path().string());
        }
        std::sort(files.begin(), files.end());
        for (const auto& f : files) load_file(f);
    } else {
        load_file(path);
    }
    if (out.empty()) throw std::runtime_error("no instances found under " + path);
    for (const auto& inst : out) {
        auto violations = validate_instance(inst);
        if (!violations.empty()) throw ValidationError(std::move(violations));
    }
    return out;
}

std::vector<gen::QuestionItem> load_items(const std::string& path) {
    std::vector<gen::QuestionItem> items;
    for (const auto& doc : read_jsonl(path)) items.push_back(gen::item_from_json(doc));
    return items;
}

std::map<std::string, VideoMeta> video_map(const std::vector<AnnotationInstance>& instances) {
    std::map<std::string, VideoMeta> videos;
    for (const auto& inst : instances)
        for (const auto& v : inst.videos) videos[v.video_id] = v;
    return videos;
}

// ---------------------------------------------------------------------------
// config / flag / environment resolution.  Precedence (highest first):
// config file, then command-line flag, then environment variable, then default.

const json* config_section(const json& config, const char* section) {
    if (config.is_object() && config.contains(section) && config[section].is_object())
        return &config[section];
    return nullptr;
}

std::optional<std::string> env_value(const char* name) {
    if (!name) return std::nullopt;
    const char* v = std::getenv(name);
    if (!v || !*v) return std::nullopt;
    return std::string(v);
}

template <typename T>
T resolve(const json* section, const char* key, const CLI::Option* opt, const T& flag_value,
          const char* env_name, const T& fallback) {
    if (section && section->contains(key)) return (*section)[key].get<T>();
    if (opt && opt->count() > 0) return flag_value;
    if (auto env = env_value(env_name)) {
        if constexpr (std::is_same_v<T, std::string>)
            return *env;
        else if constexpr (std::is_same_v<T, bool>)
            return *env == "1" || *env == "true";
        else if constexpr (std::is_floating_point_v<T>)
            return static_cast<T>(std::stod(*env));
        else
            return static_cast<T>(std::stoll(*env));
    }
    return fallback;
}

struct Common {
    std::string input;
    std::string output;
    std::string config_path;
    uint64_t seed = 0;
    json config = json::object();
    CLI::Option* seed_opt = nullptr;

    void attach(CLI::App* sub, bool with_input = true) {
        if (with_input)
            sub->add_option("-i,--instances", input,
                            "input path (instances, items, or records per subcommand)");
        sub->add_option("-o,--out", output, "output path");
        sub->add_option("--config", config_path, "JSON config file (overrides flags)");
        seed_opt = sub->add_option("--seed", seed, "deterministic seed");
    }

    void finalize() {
        if (!config_path.empty()) config = json::parse(read_file(config_path));
        seed = resolve<uint64_t>(config.is_object() && config.contains("seed") ? &config : nullptr,
                                 "seed", seed_opt, seed, "POVQA_SEED", seed);
    }

    void need_input(const char* what) const {
        if (input.empty()) throw std::runtime_error(std::string("missing -i/--instances (") +
                                                    what + ")");
    }
    void need_output() const {
        if (output.empty()) throw std::runtime_error("missing -o/--out");
    }
};

std::unique_ptr<client::ModelClient> build_client(const json& config, const CLI::Option* opt,
                                                  const std::string& flag_spec,
                                                  const CLI::Option* endpoint_opt,
                                                  const std::string& endpoint_flag,
                                                  const char* env_name) {
    const json* ev = config_section(config, "eval");
    const std::string spec = resolve<std::string>(ev, "model", opt, flag_spec, env_name, "");
    if (spec.empty()) throw std::runtime_error("no model client specified (--model)");
    const std::string endpoint = resolve<std::string>(ev, "endpoint", endpoint_opt, endpoint_flag,
                                                      "POVQA_ENDPOINT", "");
    std::string key_env = "POVQA_API_KEY";
    if (ev && ev->contains("api_key_env")) key_env = (*ev)["api_key_env"].get<std::string>();
    const std::string api_key = env_value(key_env.c_str()).value_or("");
    return client::make_client(spec, endpoint, api_key);
}

// ---------------------------------------------------------------------------
// subcommands

int run_validate(const Common& common) {
    common.need_input("annotation instance file");
    int64_t violations = 0;
    auto report_file = [&](const std::string& file, const std::string& bytes) {
        try {
            ParseResult res = parse_instance(bytes, /*strict=*/false);
            for (const auto& w : res.warnings) std::cout << file << ": warning: " << w << "\n";
            for (const auto& v : validate_instance(res.instance)) {
                std::cout << file << ": " << v.path << ": " << v.message << "\n";
                ++violations;
            }
        } catch (const ValidationError& e) {
            for (const auto& v : e.violations) {
                std::cout << file << ": " << v.path << ": " << v.message << "\n";
                ++violations;
            }
        }
    };
    if (fs::is_directory(common.input)) {
        std::vector<std::string> files;
        for (const auto& entry : fs::directory_iterator(common.input))
            if (entry.is_regular_file()) files.push_back(entry.path().string());
        std::sort(files.begin(), files.end());
        for (const auto& f : files) report_file(f, read_file(f));
    } else {
        report_file(common.input, read_file(common.input));
    }
    std::cout << violations << " violations\n";
    return violations == 0 ? 0 : 1;
}

int run_density(const Common& common, const std::string& time_mode) {
    common.need_input("annotation instances");
    auto instances = load_instances(common.input);
    DensityTimeMode mode = DensityTimeMode::SumDurations;
    if (time_mode == "max-sync")
        mode = DensityTimeMode::MaxPerSyncGroup;
    else if (time_mode != "sum")
        throw std::runtime_error("--time-mode must be sum or max-sync");
    DensityStats stats = decision_density(instances, mode);
    json per_kind = json::object();
    for (const auto& [kind, ks] : stats.per_kind)
        per_kind[to_string(kind)] = json{{"count", ks.count}, {"share", ks.share}};
    json doc{{"n_labels", stats.n_labels},
             {"total_seconds", stats.total_seconds},
             {"rho", stats.rho},
             {"per_kind", per_kind}};
    std::string line = canonical_line(doc);
    if (!common.output.empty()) write_file(common.output, line);
    std::cout << line;
    return 0;
}

std::map<EntityKind, int> parse_kind_counts(const std::string& text) {
    std::map<EntityKind, int> out;
    std::istringstream in(text);
    std::string part;
    while (std::getline(in, part, ',')) {
        size_t eq = part.find('=');
        auto kind = eq == std::string::npos ? std::nullopt : parse_kind(part.substr(0, eq));
        if (!kind) throw std::runtime_error("bad --counts entry: " + part);
        out[*kind] = std::stoi(part.substr(eq + 1));
    }
    return out;
}

std::map<EntityKind, std::pair<int, int>> parse_distractor_counts(const std::string& text) {
    std::map<EntityKind, std::pair<int, int>> out;
    std::istringstream in(text);
    std::string part;
    while (std::getline(in, part, ',')) {
        size_t eq = part.find('=');
        size_t colon = part.find(':', eq == std::string::npos ? 0 : eq);
        auto kind = eq == std::string::npos ? std::nullopt : parse_kind(part.substr(0, eq));
        if (!kind || colon == std::string::npos)
            throw std::runtime_error("bad --distractors entry (KIND=lex:scene): " + part);
        out[*kind] = {std::stoi(part.substr(eq + 1, colon - eq - 1)),
                      std::stoi(part.substr(colon + 1))};
    }
    return out;
}

int run_synth(const Common& common, SynthParams params, const std::string& counts,
              const std::string& distractors) {
    common.need_output();
    params.seed = common.seed;
    if (params.instance_id.empty()) params.instance_id = "synth-" + std::to_string(params.seed);
    if (!counts.empty())
        params.per_kind_counts = parse_kind_counts(counts);
    else if (params.per_kind_counts.empty())
        params.per_kind_counts = {{EntityKind::SA, 8}, {EntityKind::SS, 4}, {EntityKind::OA, 6},
                                  {EntityKind::OS, 3}, {EntityKind::WO, 5}, {EntityKind::WE, 6}};
    if (!distractors.empty())
        params.distractor_counts = parse_distractor_counts(distractors);
    else if (params.distractor_counts.empty())
        for (EntityKind k : kAllKinds) params.distractor_counts[k] = {3, 2};
    AnnotationInstance inst = synth_instance(params);
    write_file(common.output, serialize_instance(inst));
    std::cout << "wrote " << common.output << " (" << inst.true_labels.size() << " true labels, "
              << inst.distractor_labels.size() << " distractors)\n";
    return 0;
}

int run_generate(const Common& common, const CLI::Option* max_per_code_opt, int64_t max_per_code,
                 const std::string& stats_path) {
    common.need_input("annotation instances");
    common.need_output();
    auto instances = load_instances(common.input);

    gen::GenConfig cfg = gen::GenConfig::defaults();
    if (const json* g = config_section(common.config, "generate")) cfg = gen::GenConfig::from_json(*g);
    cfg.seed = common.seed;
    cfg.max_per_code = resolve<int64_t>(config_section(common.config, "generate"), "max_per_code",
                                        max_per_code_opt, max_per_code, nullptr, cfg.max_per_code);
    taxonomy::TemplateRegistry registry = taxonomy::TemplateRegistry::builtin();
    if (common.config.contains("templates")) {
        std::map<std::string, std::string> overrides;
        for (const auto& [code, stem] : common.config["templates"].items())
            overrides[code] = stem.get<std::string>();
        registry = registry.with_overrides(overrides);
    }
    cfg.templates = &registry;

    std::vector<gen::QuestionItem> items;
    gen::GenerationStats stats;
    for (const auto& inst : instances) {
        gen::GenerateResult res = gen::generate_all(inst, cfg);
        for (auto& item : res.items) items.push_back(std::move(item));
        for (const auto& [code, cs] : res.stats.per_code) {
            auto& agg = stats.per_code[code];
            agg.enumerated += cs.enumerated;
            agg.emitted += cs.emitted;
            agg.skipped += cs.skipped;
            for (const auto& [reason, n] : cs.skip_reasons) agg.skip_reasons[reason] += n;
        }
    }
    std::sort(items.begin(), items.end(),
              [](const gen::QuestionItem& a, const gen::QuestionItem& b) { return a.id < b.id; });

    std::vector<json> rows;
    rows.reserve(items.size());
    for (const auto& item : items) rows.push_back(gen::item_to_json(item));
    write_jsonl(common.output, manifest_line(cfg.seed, cfg.to_json()), rows);
    if (!stats_path.empty()) write_file(stats_path, canonical_line(stats.to_json()));
    std::cout << "emitted " << stats.total_emitted() << " of " << stats.total_enumerated()
              << " enumerated combinations (" << stats.total_skipped() << " skipped)\n";
    return 0;
}

int run_sample(const Common& common, const CLI::Option* target_opt, int64_t target_n) {
    common.need_input("items JSONL");
    common.need_output();
    target_n = resolve<int64_t>(config_section(common.config, "curation"), "target_n", target_opt,
                                target_n, nullptr, target_n);
    if (target_n < 1) throw std::runtime_error("--target-n must be >= 1");
    auto items = load_items(common.input);
    auto sampled = curation::stratified_downsample(items, target_n, common.seed);
    std::vector<json> rows;
    rows.reserve(sampled.size());
    for (const auto& item : sampled) rows.push_back(gen::item_to_json(item));
    write_jsonl(common.output,
                manifest_line(common.seed, json{{"target_n", target_n}, {"seed", common.seed}}),
                rows);
    std::cout << "sampled " << sampled.size() << " of " << items.size() << " items\n";
    return 0;
}

int run_filter(const Common& common, CLI::App* sub, const std::string& model_spec,
               const std::string& endpoint, int k, int remove_threshold, int review_threshold,
               const std::string& apply_path, bool drop_review) {
    common.need_input("items JSONL");
    common.need_output();
    const json* cur = config_section(common.config, "curation");
    curation::CurationConfig cfg;
    cfg.seed = common.seed;
    cfg.filter_k = resolve<int>(cur, "filter_k", sub->get_option("--k"), k, nullptr, 3);
    cfg.remove_threshold = resolve<int>(cur, "remove_threshold", sub->get_option("--remove-threshold"),
                                        remove_threshold, nullptr, cfg.filter_k);
    cfg.review_threshold = resolve<int>(cur, "review_threshold", sub->get_option("--review-threshold"),
                                        review_threshold, nullptr, 2);
    cfg.validate();

    auto items = load_items(common.input);
    auto mdl = build_client(common.config, sub->get_option("--model"), model_spec,
                            sub->get_option("--endpoint"), endpoint, "POVQA_MODEL");
    auto verdicts = curation::blind_filter(items, *mdl, cfg);

    std::vector<json> rows;
    rows.reserve(verdicts.size());
    std::map<std::string, int64_t> tally;
    for (const auto& v : verdicts) {
        rows.push_back(curation::verdict_to_json(v));
        ++tally[v.disposition];
    }
    json cfg_doc{{"filter_k", cfg.filter_k},
                 {"remove_threshold", cfg.remove_threshold},
                 {"review_threshold", cfg.review_threshold},
                 {"model", mdl->model_id()}};
    write_jsonl(common.output, manifest_line(common.seed, cfg_doc), rows);
    if (!apply_path.empty()) {
        auto kept = curation::apply_filter(items, verdicts, drop_review);
        std::vector<json> kept_rows;
        kept_rows.reserve(kept.size());
        for (const auto& item : kept) kept_rows.push_back(gen::item_to_json(item));
        write_jsonl(apply_path, manifest_line(common.seed, cfg_doc), kept_rows);
    }
    std::cout << "keep " << tally["keep"] << ", review " << tally["review"] << ", remove "
              << tally["remove"] << "\n";
    return 0;
}

int run_paraphrase(const Common& common, CLI::App* sub, const std::string& model_spec,
                   const std::string& endpoint) {
    common.need_input("items JSONL");
    common.need_output();
    auto items = load_items(common.input);
    auto mdl = build_client(common.config, sub->get_option("--model"), model_spec,
                            sub->get_option("--endpoint"), endpoint, "POVQA_MODEL");
    auto outcome = curation::paraphrase(items, *mdl, common.seed);
    for (const auto& w : outcome.warnings) std::cerr << w << "\n";
    std::vector<json> rows;
    rows.reserve(outcome.items.size());
    for (const auto& item : outcome.items) rows.push_back(gen::item_to_json(item));
    write_jsonl(common.output, manifest_line(common.seed, json{{"model", mdl->model_id()}}), rows);
    std::cout << "changed " << outcome.changed << ", rejected " << outcome.rejected << ", failed "
              << outcome.failed << "\n";
    return 0;
}

int run_evaluate(const Common& common, CLI::App* sub, const std::string& videos_path,
                 const std::string& model_spec, const std::string& judge_spec,
                 const std::string& endpoint, const std::string& condition, int concurrency,
                 double fps, int max_frames) {
    common.need_input("items JSONL");
    common.need_output();
    if (videos_path.empty()) throw std::runtime_error("missing --videos (annotation instances)");
    auto items = load_items(common.input);
    auto videos = video_map(load_instances(videos_path));

    const json* ev = config_section(common.config, "eval");
    eval::EvalRunConfig cfg;
    cfg.seed = common.seed;
    cfg.condition = resolve<std::string>(ev, "condition", sub->get_option("--condition"), condition,
                                         "POVQA_CONDITION", "baseline");
    cfg.concurrency = resolve<int>(ev, "concurrency", sub->get_option("--concurrency"), concurrency,
                                   nullptr, 4);
    cfg.fps = resolve<double>(ev, "fps", sub->get_option("--fps"), fps, nullptr, 1.0);
    cfg.max_frames = resolve<int>(ev, "max_frames", sub->get_option("--max-frames"), max_frames,
                                  nullptr, 32);

    auto mdl = build_client(common.config, sub->get_option("--model"), model_spec,
                            sub->get_option("--endpoint"), endpoint, "POVQA_MODEL");
    std::unique_ptr<client::ModelClient> judge;
    const std::string judge_spec_eff =
        resolve<std::string>(ev, "judge", sub->get_option("--judge"), judge_spec, "POVQA_JUDGE", "");
    if (!judge_spec_eff.empty()) {
        const std::string ep = resolve<std::string>(ev, "endpoint", sub->get_option("--endpoint"),
                                                    endpoint, "POVQA_ENDPOINT", "");
        std::string key_env = "POVQA_API_KEY";
        if (ev && ev->contains("api_key_env")) key_env = (*ev)["api_key_env"].get<std::string>();
        judge = client::make_client(judge_spec_eff, ep, env_value(key_env.c_str()).value_or(""));
    }

    auto records = eval::run_eval(items, videos, *mdl, judge.get(), cfg);
    std::vector<json> rows;
    rows.reserve(records.size());
    int64_t n_correct = 0;
    for (const auto& r : records) {
        rows.push_back(eval::record_to_json(r));
        if (r.correct) ++n_correct;
    }
    // execution knobs (concurrency) shape timing, not content, so the config
    // hash covers only the content-shaping settings
    json cfg_doc{{"condition", cfg.condition}, {"fps", cfg.fps},
                 {"max_frames", cfg.max_frames}, {"model", mdl->model_id()},
                 {"seed", cfg.seed}};
    write_jsonl(common.output, manifest_line(cfg.seed, cfg_doc), rows);
    std::cout << "evaluated " << records.size() << " items, " << n_correct << " correct\n";
    return 0;
}

int run_judge(const Common& common, CLI::App* sub, const std::string& items_path,
              const std::string& model_spec, const std::string& endpoint) {
    common.need_input("eval records JSONL");
    common.need_output();
    if (items_path.empty()) throw std::runtime_error("missing --items (question items JSONL)");
    std::map<std::string, gen::QuestionItem> items;
    for (auto& item : load_items(items_path)) items[item.id] = std::move(item);
    auto judge = build_client(common.config, sub->get_option("--model"), model_spec,
                              sub->get_option("--endpoint"), endpoint, "POVQA_JUDGE");

    std::vector<eval::EvalRecord> records;
    for (const auto& doc : read_jsonl(common.input)) records.push_back(eval::record_from_json(doc));
    int64_t changed = 0;
    for (auto& rec : records) {
        auto it = items.find(rec.question_id);
        if (it == items.end())
            throw std::runtime_error("record references unknown question " + rec.question_id);
        const gen::QuestionItem& item = it->second;
        std::string extracted = eval::judge_extract(item.stem, eval::option_lines(item),
                                                    item.options.size(), rec.raw_text, judge.get());
        if (extracted != rec.extracted) ++changed;
        rec.extracted = extracted;
        rec.correct = extracted == eval::option_letter(static_cast<size_t>(item.answer_index));
    }
    std::sort(records.begin(), records.end(),
              [](const eval::EvalRecord& a, const eval::EvalRecord& b) {
                  return a.question_id < b.question_id;
              });
    std::vector<json> rows;
    rows.reserve(records.size());
    for (const auto& r : records) rows.push_back(eval::record_to_json(r));
    write_jsonl(common.output, manifest_line(common.seed, json{{"judge", judge->model_id()}}), rows);
    std::cout << "re-extracted " << records.size() << " records, " << changed << " changed\n";
    return 0;
}

int run_analyze(const Common& common, const std::string& items_path, const std::string& videos_path,
                const std::string& facets_csv, const std::string& format_name,
                bool entity_involved) {
    common.need_input("eval records JSONL");
    if (items_path.empty()) throw std::runtime_error("missing --items (question items JSONL)");
    std::map<std::string, gen::QuestionItem> items;
    for (auto& item : load_items(items_path)) items[item.id] = std::move(item);
    std::map<std::string, VideoMeta> videos;
    if (!videos_path.empty()) videos = video_map(load_instances(videos_path));

    std::vector<std::string> facets;
    if (facets_csv == "all") {
        facets = report::kFacetNames;
        if (videos.empty())
            facets.erase(std::remove_if(facets.begin(), facets.end(),
                                        [](const std::string& f) {
                                            return f == "game" || f == "video_length_bucket";
                                        }),
                         facets.end());
    } else {
        std::istringstream in(facets_csv);
        std::string f;
        while (std::getline(in, f, ','))
            if (!f.empty()) facets.push_back(f);
    }

    std::vector<eval::EvalRecord> records;
    for (const auto& doc : read_jsonl(common.input)) records.push_back(eval::record_from_json(doc));

    report::FacetInputs in;
    in.items = &items;
    in.videos = videos.empty() ? nullptr : &videos;
    in.entity_per_involved_kind = entity_involved;
    report::Report rep = report::build_report(records, in, facets);
    std::string bytes = report::emit_report(rep, report::parse_format(format_name));
    if (!common.output.empty())
        write_file(common.output, bytes);
    else
        std::cout << bytes;
    return 0;
}

int run_export_review(const Common& common, const std::string& verdicts_path) {
    common.need_input("items JSONL");
    if (verdicts_path.empty()) throw std::runtime_error("missing --verdicts");
    auto items = load_items(common.input);
    std::map<std::string, curation::FilterVerdict> verdicts;
    for (const auto& doc : read_jsonl(verdicts_path)) {
        auto v = curation::verdict_from_json(doc);
        verdicts[v.question_id] = std::move(v);
    }
    std::string sheet = "id\tcode\tblind_correct\tstem\toptions\n";
    int64_t n = 0;
    for (const auto& item : items) {
        auto it = verdicts.find(item.id);
        if (it == verdicts.end() || it->second.disposition != "review") continue;
        std::string options;
        for (size_t i = 0; i < item.options.size(); ++i) {
            if (i) options += " | ";
            options += eval::option_letter(i) + ". " + item.options[i].text;
            if (item.options[i].is_correct) options += " *";
        }
        sheet += item.id + "\t" + item.code + "\t" + std::to_string(it->second.n_correct()) + "/" +
                 std::to_string(it->second.trials.size()) + "\t" + item.stem + "\t" + options +
                 "\n";
        ++n;
    }
    if (!common.output.empty())
        write_file(common.output, sheet);
    else
        std::cout << sheet;
    std::cerr << n << " items flagged for review\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"benchmark forge for densely annotated multi-POV gameplay timelines"};
    app.require_subcommand(1);
    app.set_version_flag("--version", POVQA_VERSION);

    std::function<int()> runner;

    // validate
    {
        auto* sub = app.add_subcommand("validate", "check annotation instances against invariants");
        auto common = std::make_shared<Common>();
        common->attach(sub);
        sub->callback([common, &runner] {
            runner = [common] {
                common->finalize();
                return run_validate(*common);
            };
        });
    }
    // density
    {
        auto* sub = app.add_subcommand("density", "decision-density and per-kind label shares");
        auto common = std::make_shared<Common>();
        auto mode = std::make_shared<std::string>("sum");
        common->attach(sub);
        sub->add_option("--time-mode", *mode, "denominator: sum | max-sync");
        sub->callback([common, mode, &runner] {
            runner = [common, mode] {
                common->finalize();
                return run_density(*common, *mode);
            };
        });
    }
    // synth
    {
        auto* sub = app.add_subcommand("synth", "deterministic synthetic annotation instance");
        auto common = std::make_shared<Common>();
        auto params = std::make_shared<SynthParams>();
        auto counts = std::make_shared<std::string>();
        auto distractors = std::make_shared<std::string>();
        common->attach(sub, /*with_input=*/false);
        sub->add_option("--id", params->instance_id, "instance id (default synth-<seed>)");
        sub->add_option("--videos", params->n_videos, "number of synchronized videos");
        sub->add_option("--duration", params->duration_s, "seconds per video");
        sub->add_option("--counts", *counts, "true labels per kind, e.g. SA=8,OA=6");
        sub->add_option("--distractors", *distractors, "distractors per kind, e.g. SA=3:2");
        sub->add_option("--count-group", params->count_group_size,
                        "recurring-caption group size (0 disables)");
        sub->add_option("--intent-every", params->intent_every, "every Nth SA/OA label has intent");
        sub->add_option("--quantity-every", params->quantity_every,
                        "every Nth WO label has a quantity");
        sub->callback([common, params, counts, distractors, &runner] {
            runner = [common, params, counts, distractors] {
                common->finalize();
                return run_synth(*common, *params, *counts, *distractors);
            };
        });
    }
    // generate
    {
        auto* sub = app.add_subcommand("generate", "enumerate question items from instances");
        auto common = std::make_shared<Common>();
        auto max_per_code = std::make_shared<int64_t>(0);
        auto stats_path = std::make_shared<std::string>();
        common->attach(sub);
        auto* cap_opt = sub->add_option("--max-per-code", *max_per_code,
                                        "cap emitted items per question code (0 = unbounded)");
        sub->add_option("--stats", *stats_path, "write enumeration statistics JSON here");
        sub->callback([common, max_per_code, stats_path, cap_opt, &runner] {
            runner = [common, max_per_code, stats_path, cap_opt] {
                common->finalize();
                return run_generate(*common, cap_opt, *max_per_code, *stats_path);
            };
        });
    }
    // sample
    {
        auto* sub = app.add_subcommand("sample", "stratified downsample of items by code");
        auto common = std::make_shared<Common>();
        auto target = std::make_shared<int64_t>(0);
        common->attach(sub);
        auto* target_opt = sub->add_option("--target-n", *target, "target item count");
        sub->callback([common, target, target_opt, &runner] {
            runner = [common, target, target_opt] {
                common->finalize();
                return run_sample(*common, target_opt, *target);
            };
        });
    }
    // filter
    {
        auto* sub = app.add_subcommand("filter", "blind language-prior filter over items");
        auto common = std::make_shared<Common>();
        auto model = std::make_shared<std::string>();
        auto endpoint = std::make_shared<std::string>();
        auto k = std::make_shared<int>(3);
        auto remove_t = std::make_shared<int>(3);
        auto review_t = std::make_shared<int>(2);
        auto apply_path = std::make_shared<std::string>();
        auto drop_review = std::make_shared<bool>(false);
        common->attach(sub);
        sub->add_option("--model", *model, "client spec: mock:<behavior> or http:<model>");
        sub->add_option("--endpoint", *endpoint, "chat-completions endpoint for http clients");
        sub->add_option("--k", *k, "blind trials per item");
        sub->add_option("--remove-threshold", *remove_t, "correct-count that removes (default k)");
        sub->add_option("--review-threshold", *review_t, "correct-count that flags for review");
        sub->add_option("--apply", *apply_path, "also write surviving items here");
        sub->add_flag("--drop-review", *drop_review, "drop review-flagged items in --apply output");
        sub->callback([=, &runner] {
            runner = [=] {
                common->finalize();
                return run_filter(*common, sub, *model, *endpoint, *k, *remove_t, *review_t,
                                  *apply_path, *drop_review);
            };
        });
    }
    // paraphrase
    {
        auto* sub = app.add_subcommand("paraphrase", "guarded stem rewrite pass");
        auto common = std::make_shared<Common>();
        auto model = std::make_shared<std::string>();
        auto endpoint = std::make_shared<std::string>();
        common->attach(sub);
        sub->add_option("--model", *model, "client spec: mock:<behavior> or http:<model>");
        sub->add_option("--endpoint", *endpoint, "chat-completions endpoint for http clients");
        sub->callback([=, &runner] {
            runner = [=] {
                common->finalize();
                return run_paraphrase(*common, sub, *model, *endpoint);
            };
        });
    }
    // evaluate
    {
        auto* sub = app.add_subcommand("evaluate", "run a model over items and record answers");
        auto common = std::make_shared<Common>();
        auto videos = std::make_shared<std::string>();
        auto model = std::make_shared<std::string>();
        auto judge = std::make_shared<std::string>();
        auto endpoint = std::make_shared<std::string>();
        auto condition = std::make_shared<std::string>("baseline");
        auto concurrency = std::make_shared<int>(4);
        auto fps = std::make_shared<double>(1.0);
        auto max_frames = std::make_shared<int>(32);
        common->attach(sub);
        sub->add_option("--videos", *videos, "annotation instances supplying video metadata");
        sub->add_option("--model", *model, "client spec: mock:<behavior> or http:<model>");
        sub->add_option("--judge", *judge, "judge client spec for answer extraction");
        sub->add_option("--endpoint", *endpoint, "chat-completions endpoint for http clients");
        sub->add_option("--condition", *condition,
                        "baseline | no_video | random_frame | shuffled_frames");
        sub->add_option("--concurrency", *concurrency, "parallel in-flight items");
        sub->add_option("--fps", *fps, "frame sampling rate");
        sub->add_option("--max-frames", *max_frames, "frame cap per item");
        sub->callback([=, &runner] {
            runner = [=] {
                common->finalize();
                return run_evaluate(*common, sub, *videos, *model, *judge, *endpoint, *condition,
                                    *concurrency, *fps, *max_frames);
            };
        });
    }
    // judge
    {
        auto* sub = app.add_subcommand("judge", "re-extract answers from recorded raw responses");
        auto common = std::make_shared<Common>();
        auto items = std::make_shared<std::string>();
        auto model = std::make_shared<std::string>();
        auto endpoint = std::make_shared<std::string>();
        common->attach(sub);
        sub->add_option("--items", *items, "question items JSONL the records refer to");
        sub->add_option("--model", *model, "judge client spec");
        sub->add_option("--endpoint", *endpoint, "chat-completions endpoint for http clients");
        sub->callback([=, &runner] {
            runner = [=] {
                common->finalize();
                return run_judge(*common, sub, *items, *model, *endpoint);
            };
        });
    }
    // analyze
    {
        auto* sub = app.add_subcommand("analyze", "faceted accuracy report from eval records");
        auto common = std::make_shared<Common>();
        auto items = std::make_shared<std::string>();
        auto videos = std::make_shared<std::string>();
        auto facets = std::make_shared<std::string>(
            "code,category,level,entity,condition,n_videos,distractor_subtype");
        auto format = std::make_shared<std::string>("human");
        auto involved = std::make_shared<bool>(false);
        common->attach(sub);
        sub->add_option("--items", *items, "question items JSONL the records refer to");
        sub->add_option("--videos", *videos, "annotation instances (enables game/length facets)");
        sub->add_option("--facets", *facets, "comma list or 'all'");
        sub->add_option("--format", *format, "structured | tabular | human");
        sub->add_flag("--entity-involved", *involved,
                      "also count cross-entity items under their reference kind");
        sub->callback([=, &runner] {
            runner = [=] {
                common->finalize();
                return run_analyze(*common, *items, *videos, *facets, *format, *involved);
            };
        });
    }
    // export-review
    {
        auto* sub = app.add_subcommand("export-review", "review-flagged items as a TSV sheet");
        auto common = std::make_shared<Common>();
        auto verdicts = std::make_shared<std::string>();
        common->attach(sub);
        sub->add_option("--verdicts", *verdicts, "blind-filter verdicts JSONL");
        sub->callback([=, &runner] {
            runner = [=] {
                common->finalize();
                return run_export_review(*common, *verdicts);
            };
        });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    const std::string sub_name = app.get_subcommands().empty()
                                     ? ""
                                     : app.get_subcommands().front()->get_name();
    try {
        return runner ? runner() : 2;
    } catch (const ValidationError& e) {
        json violations = json::array();
        for (const auto& v : e.violations)
            violations.push_back(json{{"path", v.path}, {"message", v.message}});
        std::cerr << canonical_line(
            json{{"error", "validation failed"}, {"subcommand", sub_name}, {"violations", violations}});
        return 1;
    } catch (const std::exception& e) {
        std::cerr << canonical_line(json{{"error", e.what()}, {"subcommand", sub_name}});
        return 1;
    }
}
