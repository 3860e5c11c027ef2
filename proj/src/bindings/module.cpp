// Python bindings for the benchmark-forging core.  Structured data crosses
// the boundary as plain dicts/lists mirroring the canonical JSON layouts, so
// the Python surface matches the CLI's file formats one-to-one.
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "povqa/annotation.hpp"
#include "povqa/clients.hpp"
#include "povqa/curation.hpp"
#include "povqa/eval.hpp"
#include "povqa/generator.hpp"
#include "povqa/report.hpp"
#include "povqa/taxonomy.hpp"

namespace py = pybind11;
using namespace povqa;

namespace {

// ---------------------------------------------------------------------------
// json <-> python conversion

py::object to_py(const json& j) {
    switch (j.type()) {
        case json::value_t::null:
            return py::none();
        case json::value_t::boolean:
            return py::bool_(j.get<bool>());
        case json::value_t::number_integer:
            return py::int_(j.get<int64_t>());
        case json::value_t::number_unsigned:
            return py::int_(j.get<uint64_t>());
        case json::value_t::number_float:
            return py::float_(j.get<double>());
        case json::value_t::string:
            return py::str(j.get<std::string>());
        case json::value_t::array: {
            py::list out;
            for (const auto& v : j) out.append(to_py(v));
            return out;
        }
        case json::value_t::object: {
            py::dict out;
            for (const auto& [k, v] : j.items()) out[py::str(k)] = to_py(v);
            return out;
        }
        default:
            throw std::invalid_argument("unsupported JSON value");
    }
}

json from_py(const py::handle& obj) {
    if (obj.is_none()) return nullptr;
    if (py::isinstance<py::bool_>(obj)) return obj.cast<bool>();
    if (py::isinstance<py::int_>(obj)) return obj.cast<int64_t>();
    if (py::isinstance<py::float_>(obj)) return obj.cast<double>();
    if (py::isinstance<py::str>(obj)) return obj.cast<std::string>();
    if (py::isinstance<py::list>(obj) || py::isinstance<py::tuple>(obj)) {
        json arr = json::array();
        for (const auto& v : obj) arr.push_back(from_py(v));
        return arr;
    }
    if (py::isinstance<py::dict>(obj)) {
        json doc = json::object();
        for (const auto& [k, v] : obj.cast<py::dict>()) doc[k.cast<std::string>()] = from_py(v);
        return doc;
    }
    throw std::invalid_argument("cannot convert python object to JSON");
}

AnnotationInstance instance_arg(const py::handle& doc) { return instance_from_json(from_py(doc)); }

std::vector<AnnotationInstance> instances_arg(const py::list& docs) {
    std::vector<AnnotationInstance> out;
    out.reserve(docs.size());
    for (const auto& d : docs) out.push_back(instance_arg(d));
    return out;
}

std::vector<gen::QuestionItem> items_arg(const py::list& docs) {
    std::vector<gen::QuestionItem> out;
    out.reserve(docs.size());
    for (const auto& d : docs) out.push_back(gen::item_from_json(from_py(d)));
    return out;
}

py::list items_out(const std::vector<gen::QuestionItem>& items) {
    py::list out;
    for (const auto& item : items) out.append(to_py(gen::item_to_json(item)));
    return out;
}

std::map<std::string, VideoMeta> videos_arg(const py::list& instance_docs) {
    std::map<std::string, VideoMeta> videos;
    for (const auto& inst : instances_arg(instance_docs))
        for (const auto& v : inst.videos) videos[v.video_id] = v;
    return videos;
}

// ---------------------------------------------------------------------------
// python-extendable text client (frame parts are rendered to <frame_k> tokens
// before the python side sees the prompt)

class TextClient : public client::ModelClient {
public:
    explicit TextClient(std::string model_id) : model_id_(std::move(model_id)) {}
    std::string model_id() const override { return model_id_; }
    std::string complete(const std::vector<client::Message>& messages) override {
        return reply(client::render_prompt_text(messages), 0);
    }
    std::string complete_trial(const std::vector<client::Message>& messages, int trial) override {
        return reply(client::render_prompt_text(messages), trial);
    }
    virtual std::string reply(const std::string& rendered, int trial) = 0;

private:
    std::string model_id_;
};

class PyTextClient : public TextClient {
public:
    using TextClient::TextClient;
    std::string reply(const std::string& rendered, int trial) override {
        PYBIND11_OVERRIDE_PURE(std::string, TextClient, reply, rendered, trial);
    }
};

std::vector<client::Message> messages_arg(const py::list& docs) {
    std::vector<client::Message> out;
    for (const auto& m : docs) {
        json doc = from_py(m);
        client::Message msg;
        msg.role = doc.value("role", "user");
        for (const auto& p : doc.value("parts", json::array())) {
            client::Part part;
            if (p.value("type", "text") == "frame") {
                part.type = client::Part::Type::Frame;
                part.video_id = p.value("video_id", "");
                part.t_s = p.value("t_s", 0.0);
                part.resize_long_side_px = p.value("resize_long_side_px", 720);
            } else {
                part.text = p.value("text", "");
            }
            msg.parts.push_back(std::move(part));
        }
        out.push_back(std::move(msg));
    }
    return out;
}

py::list messages_out(const std::vector<client::Message>& messages) {
    py::list out;
    for (const auto& m : messages) {
        json parts = json::array();
        for (const auto& p : m.parts) {
            if (p.type == client::Part::Type::Frame)
                parts.push_back(json{{"type", "frame"},
                                     {"video_id", p.video_id},
                                     {"t_s", p.t_s},
                                     {"resize_long_side_px", p.resize_long_side_px}});
            else
                parts.push_back(json{{"type", "text"}, {"text", p.text}});
        }
        out.append(to_py(json{{"role", m.role}, {"parts", parts}}));
    }
    return out;
}

json plan_to_json(const eval::FramePlan& plan) {
    return json{{"video_id", plan.video_id},
                {"timestamps_s", plan.timestamps_s},
                {"presentation", plan.presentation},
                {"resize_long_side_px", plan.resize_long_side_px}};
}

eval::FramePlan plan_from_json(const json& doc) {
    eval::FramePlan plan;
    plan.video_id = doc.value("video_id", "");
    plan.timestamps_s = doc.value("timestamps_s", std::vector<double>{});
    plan.presentation = doc.value("presentation", std::vector<size_t>{});
    plan.resize_long_side_px = doc.value("resize_long_side_px", 720);
    return plan;
}

gen::GenConfig gen_config_arg(const py::handle& doc_obj, taxonomy::TemplateRegistry& registry) {
    json doc = doc_obj.is_none() ? json::object() : from_py(doc_obj);
    gen::GenConfig cfg = doc.empty() ? gen::GenConfig::defaults() : gen::GenConfig::from_json(doc);
    if (doc.contains("templates")) {
        std::map<std::string, std::string> overrides;
        for (const auto& [code, stem] : doc["templates"].items())
            overrides[code] = stem.get<std::string>();
        registry = registry.with_overrides(overrides);
    }
    cfg.templates = &registry;
    return cfg;
}

}  // namespace

PYBIND11_MODULE(_povqa, m) {
    m.doc() = "benchmark forge for densely annotated multi-POV gameplay timelines";
    m.attr("__version__") = POVQA_VERSION;

    // ----- annotation model ------------------------------------------------
    m.def(
        "parse_instance",
        [](const std::string& text, bool strict) {
            ParseResult res = parse_instance(text, strict);
            py::dict out;
            out["instance"] = to_py(instance_to_json(res.instance));
            out["warnings"] = to_py(json(res.warnings));
            return out;
        },
        py::arg("text"), py::arg("strict") = true,
        "Parse one annotation instance from JSON text; returns {instance, warnings}.");
    m.def(
        "serialize_instance",
        [](const py::dict& doc) { return serialize_instance(instance_arg(doc)); }, py::arg("doc"),
        "Canonical JSON bytes for an instance dict (stable key order, fixed float format).");
    m.def(
        "validate_instance",
        [](const py::dict& doc) {
            json out = json::array();
            for (const auto& v : validate_instance(instance_arg(doc)))
                out.push_back(json{{"path", v.path}, {"message", v.message}});
            return to_py(out);
        },
        py::arg("doc"), "Invariant violations as [{path, message}]; empty means valid.");
    m.def(
        "synth_instance",
        [](const py::dict& params_doc) {
            json doc = from_py(params_doc);
            SynthParams p;
            p.instance_id = doc.value("instance_id", std::string("synth"));
            p.n_videos = doc.value("n_videos", 1);
            p.duration_s = doc.value("duration_s", 60.0);
            p.overlap_bias = doc.value("overlap_bias", 0.3);
            p.seed = doc.value("seed", uint64_t{0});
            p.count_group_size = doc.value("count_group_size", 3);
            p.intent_every = doc.value("intent_every", 3);
            p.quantity_every = doc.value("quantity_every", 3);
            const json kind_counts = doc.value("per_kind_counts", json::object());
            for (const auto& [k, n] : kind_counts.items())
                if (auto kind = parse_kind(k)) p.per_kind_counts[*kind] = n.get<int>();
            const json dis_counts = doc.value("distractor_counts", json::object());
            for (const auto& [k, pair] : dis_counts.items())
                if (auto kind = parse_kind(k))
                    p.distractor_counts[*kind] = {pair.at(0).get<int>(), pair.at(1).get<int>()};
            return to_py(instance_to_json(synth_instance(p)));
        },
        py::arg("params"),
        "Deterministic synthetic instance; params mirror the synth subcommand.");
    m.def(
        "decision_density",
        [](const py::list& docs, const std::string& time_mode) {
            DensityTimeMode mode = time_mode == "max-sync" ? DensityTimeMode::MaxPerSyncGroup
                                                           : DensityTimeMode::SumDurations;
            DensityStats stats = decision_density(instances_arg(docs), mode);
            json per_kind = json::object();
            for (const auto& [kind, ks] : stats.per_kind)
                per_kind[to_string(kind)] = json{{"count", ks.count}, {"share", ks.share}};
            return to_py(json{{"n_labels", stats.n_labels},
                              {"total_seconds", stats.total_seconds},
                              {"rho", stats.rho},
                              {"per_kind", per_kind}});
        },
        py::arg("instances"), py::arg("time_mode") = "sum",
        "Corpus decision density (labels per second) and per-kind shares.");

    // ----- taxonomy ---------------------------------------------------------
    m.def(
        "parse_code",
        [](const std::string& raw) {
            taxonomy::QuestionCode code = taxonomy::parse_code(raw);
            json doc{{"raw", code.raw},
                     {"level", code.level},
                     {"form", taxonomy::to_string(code.form)},
                     {"multi_video", code.multi_video},
                     {"windowed", code.windowed()},
                     {"category", taxonomy::code_category(code).name}};
            if (code.ref_entity) doc["ref_entity"] = to_string(*code.ref_entity);
            if (code.ans_entity) doc["ans_entity"] = to_string(*code.ans_entity);
            doc["ref_timestamp"] = code.ref_timestamp;
            doc["ans_mix"] = code.ans_mix;
            return to_py(doc);
        },
        py::arg("code"), "Structured view of a question code.");
    m.def("all_codes", [] { return taxonomy::TemplateRegistry::builtin().all_codes(); },
          "Every question code with a built-in stem template, sorted.");
    m.def(
        "render_stem",
        [](const std::string& code, const py::dict& slots_doc) {
            json doc = from_py(slots_doc);
            taxonomy::StemSlots slots;
            if (doc.contains("caption")) slots.caption = doc["caption"].get<std::string>();
            if (doc.contains("ref_caption")) slots.ref_caption = doc["ref_caption"].get<std::string>();
            if (doc.contains("other")) slots.other = doc["other"].get<std::string>();
            if (doc.contains("ref_other")) slots.ref_other = doc["ref_other"].get<std::string>();
            if (doc.contains("timestamp")) slots.timestamp = doc["timestamp"].get<std::string>();
            if (doc.contains("video_indices"))
                slots.video_indices = doc["video_indices"].get<std::vector<int64_t>>();
            auto reg = taxonomy::TemplateRegistry::builtin();
            return taxonomy::render_stem(taxonomy::parse_code(code), slots, reg);
        },
        py::arg("code"), py::arg("slots"), "Fill a built-in stem template.");

    // ----- generation -------------------------------------------------------
    m.def(
        "generate",
        [](const py::dict& instance_doc, const py::handle& config_doc) {
            taxonomy::TemplateRegistry registry = taxonomy::TemplateRegistry::builtin();
            gen::GenConfig cfg = gen_config_arg(config_doc, registry);
            gen::GenerateResult res = gen::generate_all(instance_arg(instance_doc), cfg);
            py::dict out;
            out["items"] = items_out(res.items);
            out["stats"] = to_py(res.stats.to_json());
            return out;
        },
        py::arg("instance"), py::arg("config") = py::none(),
        "Enumerate every admissible question item; returns {items, stats}.");

    // ----- curation ----------------------------------------------------------
    m.def(
        "stratified_downsample",
        [](const py::list& items, int64_t target_n, uint64_t seed) {
            return items_out(curation::stratified_downsample(items_arg(items), target_n, seed));
        },
        py::arg("items"), py::arg("target_n"), py::arg("seed") = 0,
        "Per-code stratified downsample; identity when target_n covers the input.");
    m.def(
        "blind_filter",
        [](const py::list& items, client::ModelClient& mdl, const py::handle& config_doc) {
            json doc = config_doc.is_none() ? json::object() : from_py(config_doc);
            curation::CurationConfig cfg;
            cfg.seed = doc.value("seed", uint64_t{0});
            cfg.filter_k = doc.value("filter_k", 3);
            cfg.remove_threshold = doc.value("remove_threshold", cfg.filter_k);
            cfg.review_threshold = doc.value("review_threshold", 2);
            cfg.validate();
            auto items_vec = items_arg(items);
            std::vector<curation::FilterVerdict> verdicts;
            {
                py::gil_scoped_release release;
                verdicts = curation::blind_filter(items_vec, mdl, cfg);
            }
            json out = json::array();
            for (const auto& v : verdicts) out.push_back(curation::verdict_to_json(v));
            return to_py(out);
        },
        py::arg("items"), py::arg("client"), py::arg("config") = py::none(),
        "Question-only trials per item; verdicts carry trials and a disposition.");
    m.def(
        "apply_filter",
        [](const py::list& items, const py::list& verdict_docs, bool drop_review) {
            std::vector<curation::FilterVerdict> verdicts;
            for (const auto& d : verdict_docs)
                verdicts.push_back(curation::verdict_from_json(from_py(d)));
            return items_out(curation::apply_filter(items_arg(items), verdicts, drop_review));
        },
        py::arg("items"), py::arg("verdicts"), py::arg("drop_review") = false,
        "Drop removed (and optionally review-flagged) items.");
    m.def(
        "paraphrase",
        [](const py::list& items, client::ModelClient& mdl, uint64_t seed) {
            auto items_vec = items_arg(items);
            curation::ParaphraseOutcome outcome;
            {
                py::gil_scoped_release release;
                outcome = curation::paraphrase(items_vec, mdl, seed);
            }
            py::dict out;
            out["items"] = items_out(outcome.items);
            out["changed"] = outcome.changed;
            out["rejected"] = outcome.rejected;
            out["failed"] = outcome.failed;
            out["warnings"] = to_py(json(outcome.warnings));
            return out;
        },
        py::arg("items"), py::arg("client"), py::arg("seed") = 0,
        "Guarded stem rewrites; quoted spans and timestamps must survive verbatim.");

    // ----- evaluation ---------------------------------------------------------
    m.def(
        "frame_plan",
        [](const std::string& video_id, double duration_s, double fps, int max_frames) {
            eval::FramePlan plan = eval::frame_plan(duration_s, fps, max_frames);
            plan.video_id = video_id;
            return to_py(plan_to_json(plan));
        },
        py::arg("video_id"), py::arg("duration_s"), py::arg("fps") = 1.0,
        py::arg("max_frames") = 32,
        "Sampling timestamps: fps grid when it fits, else uniform midpoints.");
    m.def(
        "apply_ablation",
        [](const py::dict& plan_doc, const std::string& condition, uint64_t seed) {
            return to_py(plan_to_json(
                eval::apply_ablation(plan_from_json(from_py(plan_doc)), condition, seed)));
        },
        py::arg("plan"), py::arg("condition"), py::arg("seed") = 0,
        "baseline | no_video | random_frame | shuffled_frames.");
    m.def(
        "build_prompt",
        [](const py::dict& item_doc, const py::list& plan_docs,
           const std::vector<int64_t>& pov_indices) {
            std::vector<eval::FramePlan> plans;
            for (const auto& p : plan_docs) plans.push_back(plan_from_json(from_py(p)));
            return messages_out(
                eval::build_prompt(gen::item_from_json(from_py(item_doc)), plans, pov_indices));
        },
        py::arg("item"), py::arg("plans"), py::arg("pov_indices"),
        "Messages (text + frame parts) for one item under the given frame plans.");
    m.def(
        "build_blind_prompt",
        [](const py::dict& item_doc) {
            return messages_out(eval::build_blind_prompt(gen::item_from_json(from_py(item_doc))));
        },
        py::arg("item"), "Question-only prompt used by the language-prior filter.");
    m.def(
        "render_prompt_text",
        [](const py::list& message_docs) {
            return client::render_prompt_text(messages_arg(message_docs));
        },
        py::arg("messages"), "Flatten messages to text with <frame_k> tokens.");
    m.def(
        "question_key",
        [](const py::dict& item_doc) {
            return eval::question_key(gen::item_from_json(from_py(item_doc)));
        },
        py::arg("item"), "Stable hash of the item's question block (script mock keys).");
    m.def(
        "fast_letter",
        [](const std::string& raw, size_t n_options) -> py::object {
            if (auto letter = eval::fast_letter(raw, n_options)) return py::str(*letter);
            return py::none();
        },
        py::arg("raw"), py::arg("n_options") = 4, "Single-letter extraction, or None.");
    m.def(
        "judge_extract",
        [](const std::string& stem, const std::string& options_block, size_t n_options,
           const std::string& raw, client::ModelClient* judge) {
            py::gil_scoped_release release;
            return eval::judge_extract(stem, options_block, n_options, raw, judge);
        },
        py::arg("stem"), py::arg("options_block"), py::arg("n_options"), py::arg("raw"),
        py::arg("judge") = nullptr, "Fast path then judge; always a letter or \"X\".");
    m.def(
        "run_eval",
        [](const py::list& items, const py::list& instance_docs, client::ModelClient& mdl,
           client::ModelClient* judge, const py::handle& config_doc) {
            json doc = config_doc.is_none() ? json::object() : from_py(config_doc);
            eval::EvalRunConfig cfg;
            cfg.condition = doc.value("condition", std::string("baseline"));
            cfg.concurrency = doc.value("concurrency", 4);
            cfg.seed = doc.value("seed", uint64_t{0});
            cfg.fps = doc.value("fps", 1.0);
            cfg.max_frames = doc.value("max_frames", 32);
            auto items_vec = items_arg(items);
            auto videos = videos_arg(instance_docs);
            std::vector<eval::EvalRecord> records;
            {
                py::gil_scoped_release release;
                records = eval::run_eval(items_vec, videos, mdl, judge, cfg);
            }
            json out = json::array();
            for (const auto& r : records) out.push_back(eval::record_to_json(r));
            return to_py(out);
        },
        py::arg("items"), py::arg("videos"), py::arg("client"), py::arg("judge") = nullptr,
        py::arg("config") = py::none(),
        "Evaluate items against a client; one record per item, sorted by question id.");

    // ----- analysis -----------------------------------------------------------
    m.def(
        "analyze",
        [](const py::list& record_docs, const py::list& items, const std::vector<std::string>& facets,
           const py::handle& video_docs, const std::string& format_name, bool involved) {
            std::vector<eval::EvalRecord> records;
            for (const auto& d : record_docs) records.push_back(eval::record_from_json(from_py(d)));
            std::map<std::string, gen::QuestionItem> item_map;
            for (auto& item : items_arg(items)) item_map[item.id] = std::move(item);
            std::map<std::string, VideoMeta> videos;
            if (!video_docs.is_none()) videos = videos_arg(video_docs.cast<py::list>());
            report::FacetInputs in;
            in.items = &item_map;
            in.videos = videos.empty() ? nullptr : &videos;
            in.entity_per_involved_kind = involved;
            report::Report rep = report::build_report(records, in, facets);
            return report::emit_report(rep, report::parse_format(format_name));
        },
        py::arg("records"), py::arg("items"),
        py::arg("facets") = std::vector<std::string>{"code", "category", "level", "entity"},
        py::arg("videos") = py::none(), py::arg("format") = "structured",
        py::arg("involved") = false, "Faceted accuracy report rendered to the chosen format.");

    // ----- clients -------------------------------------------------------------
    py::class_<client::ModelClient, std::shared_ptr<client::ModelClient>>(m, "ModelClient")
        .def("model_id", &client::ModelClient::model_id)
        .def(
            "complete",
            [](client::ModelClient& mdl, const py::list& message_docs) {
                auto msgs = messages_arg(message_docs);
                py::gil_scoped_release release;
                return mdl.complete(msgs);
            },
            py::arg("messages"))
        .def(
            "complete_trial",
            [](client::ModelClient& mdl, const py::list& message_docs, int trial) {
                auto msgs = messages_arg(message_docs);
                py::gil_scoped_release release;
                return mdl.complete_trial(msgs, trial);
            },
            py::arg("messages"), py::arg("trial"));

    py::class_<client::MockClient, client::ModelClient, std::shared_ptr<client::MockClient>>(
        m, "MockClient")
        .def(py::init<const std::string&>(), py::arg("behavior"),
             "fixed:<text> | hash | echo | script:<path> | plant:<path>:<n> | ordered:<path> | "
             "judge");

    py::class_<TextClient, client::ModelClient, PyTextClient, std::shared_ptr<TextClient>>(
        m, "TextClient")
        .def(py::init<std::string>(), py::arg("model_id"),
             "Subclass and implement reply(rendered, trial) -> str.")
        .def("reply", &TextClient::reply, py::arg("rendered"), py::arg("trial") = 0);

    m.def(
        "make_client",
        [](const std::string& spec, const std::string& endpoint, const std::string& api_key) {
            return std::shared_ptr<client::ModelClient>(
                client::make_client(spec, endpoint, api_key));
        },
        py::arg("spec"), py::arg("endpoint") = "", py::arg("api_key") = "",
        "mock:<behavior> or http:<model>.");

    // ----- misc ------------------------------------------------------------------
    m.def(
        "canonical_line",
        [](const py::handle& doc) { return canonical_line(from_py(doc)); }, py::arg("doc"),
        "Canonical single-line JSON serialization (sorted keys, %.3f floats).");
}
