#include "povqa/annotation.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <set>

#include "povqa/rng.hpp"

namespace povqa {

std::string to_string(EntityKind k) {
    switch (k) {
        case EntityKind::SA: return "SA";
        case EntityKind::SS: return "SS";
        case EntityKind::OA: return "OA";
        case EntityKind::OS: return "OS";
        case EntityKind::WO: return "WO";
        case EntityKind::WE: return "WE";
    }
    return "??";
}

std::optional<EntityKind> parse_kind(std::string_view s) {
    for (EntityKind k : kAllKinds)
        if (s == to_string(k)) return k;
    return std::nullopt;
}

double interval_overlap(const TimeInterval& a, const TimeInterval& b) {
    double lo = std::max(a.start_s, b.start_s);
    double hi = std::min(a.end_s, b.end_s);
    return hi > lo ? hi - lo : 0.0;
}

double interval_gap(const TimeInterval& a, const TimeInterval& b) {
    if (a.start_s > b.end_s) return a.start_s - b.end_s;
    if (b.start_s > a.end_s) return b.start_s - a.end_s;
    return 0.0;
}

const VideoMeta* AnnotationInstance::find_video(std::string_view video_id) const {
    for (const auto& v : videos)
        if (v.video_id == video_id) return &v;
    return nullptr;
}

ValidationError::ValidationError(std::vector<Violation> v)
    : std::runtime_error(v.empty() ? "validation failed"
                                   : "validation failed: " + v.front().path + ": " + v.front().message +
                                         (v.size() > 1 ? " (+" + std::to_string(v.size() - 1) + " more)" : "")),
      violations(std::move(v)) {}

std::string normalize_caption(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    bool pending_space = false;
    for (char c : s) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            if (!out.empty()) pending_space = true;
        } else {
            if (pending_space) out += ' ';
            pending_space = false;
            out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        }
    }
    return out;
}

std::string format_timestamp(const TimeInterval& local) {
    auto mmss = [](double t) {
        long s = static_cast<long>(t);
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%02ld:%02ld", s / 60, s % 60);
        return std::string(buf);
    };
    double lo = std::floor(local.start_s);
    double hi = std::ceil(local.end_s);
    return "[" + mmss(lo) + " to " + mmss(hi) + "]";
}

// ---------------------------------------------------------------------------
// parsing

namespace {

void warn_unknown(const json& obj, const std::string& path, const std::set<std::string>& known,
                  std::vector<std::string>* warnings) {
    if (!warnings) return;
    for (auto it = obj.cbegin(); it != obj.cend(); ++it)
        if (!known.count(it.key())) warnings->push_back("ignoring unknown field " + path + "." + it.key());
}

struct Reader {
    std::vector<Violation> violations;

    const json* need(const json& o, const std::string& path, const char* key) {
        auto it = o.find(key);
        if (it == o.end()) {
            violations.push_back({path + "." + key, "required field missing"});
            return nullptr;
        }
        return &*it;
    }
    std::string str(const json& o, const std::string& path, const char* key) {
        const json* v = need(o, path, key);
        if (!v) return {};
        if (!v->is_string()) {
            violations.push_back({path + "." + key, "expected string"});
            return {};
        }
        return v->get<std::string>();
    }
    double num(const json& o, const std::string& path, const char* key) {
        const json* v = need(o, path, key);
        if (!v) return 0.0;
        if (!v->is_number()) {
            violations.push_back({path + "." + key, "expected number"});
            return 0.0;
        }
        return v->get<double>();
    }
    std::optional<std::string> opt_str(const json& o, const std::string& path, const char* key) {
        auto it = o.find(key);
        if (it == o.end()) return std::nullopt;
        if (!it->is_string()) {
            violations.push_back({path + "." + key, "expected string"});
            return std::nullopt;
        }
        return it->get<std::string>();
    }
    std::optional<TimeInterval> opt_interval(const json& o, const std::string& path, const char* key) {
        auto it = o.find(key);
        if (it == o.end()) return std::nullopt;
        if (!it->is_object()) {
            violations.push_back({path + "." + key, "expected object"});
            return std::nullopt;
        }
        TimeInterval iv;
        iv.start_s = num(*it, path + "." + key, "start_s");
        iv.end_s = num(*it, path + "." + key, "end_s");
        return iv;
    }
};

}  // namespace

AnnotationInstance instance_from_json(const json& doc, std::vector<std::string>* warnings) {
    if (!doc.is_object()) throw ParseError("instance document must be a JSON object");
    Reader r;
    AnnotationInstance inst;

    warn_unknown(doc, "instance",
                 {"instance_id", "synced", "videos", "true_labels", "distractor_labels"}, warnings);

    inst.instance_id = r.str(doc, "instance", "instance_id");
    if (auto it = doc.find("synced"); it != doc.end() && it->is_boolean())
        inst.synced = it->get<bool>();
    else if (it != doc.end())
        r.violations.push_back({"instance.synced", "expected boolean"});
    else
        r.violations.push_back({"instance.synced", "required field missing"});

    auto arr = [&](const char* key) -> const json* {
        auto it = doc.find(key);
        if (it == doc.end()) {
            r.violations.push_back({std::string("instance.") + key, "required field missing"});
            return nullptr;
        }
        if (!it->is_array()) {
            r.violations.push_back({std::string("instance.") + key, "expected array"});
            return nullptr;
        }
        return &*it;
    };

    if (const json* vs = arr("videos")) {
        size_t i = 0;
        for (const auto& v : *vs) {
            std::string path = "videos[" + std::to_string(i++) + "]";
            if (!v.is_object()) {
                r.violations.push_back({path, "expected object"});
                continue;
            }
            warn_unknown(v, path, {"video_id", "game", "duration_s", "pov_index", "sync_offset_s"}, warnings);
            VideoMeta m;
            m.video_id = r.str(v, path, "video_id");
            m.game = r.str(v, path, "game");
            m.duration_s = r.num(v, path, "duration_s");
            m.pov_index = static_cast<int64_t>(r.num(v, path, "pov_index"));
            m.sync_offset_s = r.num(v, path, "sync_offset_s");
            inst.videos.push_back(std::move(m));
        }
    }

    if (const json* ls = arr("true_labels")) {
        size_t i = 0;
        for (const auto& l : *ls) {
            std::string path = "true_labels[" + std::to_string(i++) + "]";
            if (!l.is_object()) {
                r.violations.push_back({path, "expected object"});
                continue;
            }
            warn_unknown(l, path,
                         {"id", "video_id", "kind", "caption", "interval", "actor", "quantity",
                          "intent", "intent_distractors", "group_key"},
                         warnings);
            TrueLabel t;
            t.id = r.str(l, path, "id");
            t.video_id = r.str(l, path, "video_id");
            std::string ks = r.str(l, path, "kind");
            if (auto k = parse_kind(ks))
                t.kind = *k;
            else if (!ks.empty())
                r.violations.push_back({path + ".kind", "unknown kind '" + ks + "'"});
            t.caption = r.str(l, path, "caption");
            if (auto iv = r.opt_interval(l, path, "interval"))
                t.interval = *iv;
            else if (l.find("interval") == l.end())
                r.violations.push_back({path + ".interval", "required field missing"});
            t.actor = r.opt_str(l, path, "actor");
            if (auto it = l.find("quantity"); it != l.end()) {
                if (it->is_number_integer())
                    t.quantity = it->get<int64_t>();
                else
                    r.violations.push_back({path + ".quantity", "expected integer"});
            }
            t.intent = r.opt_str(l, path, "intent");
            if (auto it = l.find("intent_distractors"); it != l.end()) {
                if (it->is_array()) {
                    for (const auto& d : *it)
                        if (d.is_string()) t.intent_distractors.push_back(d.get<std::string>());
                } else {
                    r.violations.push_back({path + ".intent_distractors", "expected array"});
                }
            }
            t.group_key = r.opt_str(l, path, "group_key");
            inst.true_labels.push_back(std::move(t));
        }
    }

    if (const json* ds = arr("distractor_labels")) {
        size_t i = 0;
        for (const auto& d : *ds) {
            std::string path = "distractor_labels[" + std::to_string(i++) + "]";
            if (!d.is_object()) {
                r.violations.push_back({path, "expected object"});
                continue;
            }
            warn_unknown(d, path, {"id", "video_id", "kind", "caption", "subtype", "interval", "source_label"},
                         warnings);
            DistractorLabel x;
            x.id = r.str(d, path, "id");
            x.video_id = r.str(d, path, "video_id");
            std::string ks = r.str(d, path, "kind");
            if (auto k = parse_kind(ks))
                x.kind = *k;
            else if (!ks.empty())
                r.violations.push_back({path + ".kind", "unknown kind '" + ks + "'"});
            x.caption = r.str(d, path, "caption");
            x.subtype = r.str(d, path, "subtype");
            if (!x.subtype.empty() && x.subtype != "lexical" && x.subtype != "scene")
                r.violations.push_back({path + ".subtype", "expected 'lexical' or 'scene'"});
            x.interval = r.opt_interval(d, path, "interval");
            x.source_label = r.opt_str(d, path, "source_label");
            inst.distractor_labels.push_back(std::move(x));
        }
    }

    if (!r.violations.empty()) {
        std::sort(r.violations.begin(), r.violations.end(), [](const Violation& a, const Violation& b) {
            return std::tie(a.path, a.message) < std::tie(b.path, b.message);
        });
        throw ValidationError(std::move(r.violations));
    }
    return inst;
}

ParseResult parse_instance(const std::string& bytes, bool strict) {
    json doc;
    try {
        doc = json::parse(bytes);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("malformed instance document: ") + e.what());
    }
    ParseResult res;
    res.instance = instance_from_json(doc, &res.warnings);
    if (strict) {
        auto v = validate_instance(res.instance);
        if (!v.empty()) throw ValidationError(std::move(v));
    }
    return res;
}

// ---------------------------------------------------------------------------
// serialization

static json interval_json(const TimeInterval& iv) {
    return json{{"start_s", iv.start_s}, {"end_s", iv.end_s}};
}

json instance_to_json(const AnnotationInstance& inst) {
    json doc;
    doc["instance_id"] = inst.instance_id;
    doc["synced"] = inst.synced;
    json vids = json::array();
    for (const auto& v : inst.videos) {
        vids.push_back(json{{"video_id", v.video_id},
                            {"game", v.game},
                            {"duration_s", v.duration_s},
                            {"pov_index", v.pov_index},
                            {"sync_offset_s", v.sync_offset_s}});
    }
    doc["videos"] = std::move(vids);
    json tl = json::array();
    for (const auto& t : inst.true_labels) {
        json l{{"id", t.id},
               {"video_id", t.video_id},
               {"kind", to_string(t.kind)},
               {"caption", t.caption},
               {"interval", interval_json(t.interval)}};
        if (t.actor) l["actor"] = *t.actor;
        if (t.quantity) l["quantity"] = *t.quantity;
        if (t.intent) l["intent"] = *t.intent;
        if (!t.intent_distractors.empty()) l["intent_distractors"] = t.intent_distractors;
        if (t.group_key) l["group_key"] = *t.group_key;
        tl.push_back(std::move(l));
    }
    doc["true_labels"] = std::move(tl);
    json dl = json::array();
    for (const auto& d : inst.distractor_labels) {
        json l{{"id", d.id},
               {"video_id", d.video_id},
               {"kind", to_string(d.kind)},
               {"caption", d.caption},
               {"subtype", d.subtype}};
        if (d.interval) l["interval"] = interval_json(*d.interval);
        if (d.source_label) l["source_label"] = *d.source_label;
        dl.push_back(std::move(l));
    }
    doc["distractor_labels"] = std::move(dl);
    return doc;
}

std::string serialize_instance(const AnnotationInstance& inst) {
    return canonical_dump(instance_to_json(inst)) + "\n";
}

// ---------------------------------------------------------------------------
// validation

std::vector<Violation> validate_instance(const AnnotationInstance& inst) {
    std::vector<Violation> out;
    auto add = [&](std::string path, std::string msg) { out.push_back({std::move(path), std::move(msg)}); };

    if (inst.instance_id.empty()) add("instance.instance_id", "must be non-empty");
    if (inst.videos.empty()) add("instance.videos", "must contain at least one video");
    if (inst.synced && inst.videos.size() < 2) add("instance.synced", "synced instance needs >= 2 videos");

    std::set<std::string> video_ids;
    std::set<int64_t> pov_indices;
    for (size_t i = 0; i < inst.videos.size(); ++i) {
        const auto& v = inst.videos[i];
        std::string path = "videos[" + std::to_string(i) + "]";
        if (v.video_id.empty()) add(path + ".video_id", "must be non-empty");
        if (!video_ids.insert(v.video_id).second) add(path + ".video_id", "duplicate video id '" + v.video_id + "'");
        if (v.duration_s <= 0) add(path + ".duration_s", "must be > 0");
        if (v.pov_index < 1) add(path + ".pov_index", "must be >= 1");
        if (!pov_indices.insert(v.pov_index).second)
            add(path + ".pov_index", "duplicate pov index " + std::to_string(v.pov_index));
    }

    std::set<std::string> label_ids;
    for (size_t i = 0; i < inst.true_labels.size(); ++i) {
        const auto& t = inst.true_labels[i];
        std::string path = "true_labels[" + std::to_string(i) + "]";
        if (t.id.empty()) add(path + ".id", "must be non-empty");
        if (!t.id.empty() && !label_ids.insert(t.id).second) add(path + ".id", "duplicate label id '" + t.id + "'");
        if (t.caption.empty()) add(path + ".caption", "must be non-empty");
        const VideoMeta* vm = inst.find_video(t.video_id);
        if (!vm) {
            add(path + ".video_id", "unknown video '" + t.video_id + "'");
        } else {
            if (t.interval.start_s < 0) add(path + ".interval.start_s", "must be >= 0");
            if (t.interval.end_s < t.interval.start_s) add(path + ".interval.end_s", "must be >= start_s");
            if (t.interval.end_s > vm->duration_s + 1e-9)
                add(path + ".interval.end_s", "exceeds video duration");
        }
        bool other = t.kind == EntityKind::OA || t.kind == EntityKind::OS;
        if (other && (!t.actor || t.actor->empty())) add(path + ".actor", "required for OA/OS labels");
        if (t.quantity) {
            if (t.kind != EntityKind::WO) add(path + ".quantity", "only valid on WO labels");
            else if (*t.quantity < 1) add(path + ".quantity", "must be >= 1");
        }
        bool actionish = t.kind == EntityKind::SA || t.kind == EntityKind::OA;
        if (t.intent && !actionish) add(path + ".intent", "only valid on SA/OA labels");
        if (!t.intent_distractors.empty() && !t.intent)
            add(path + ".intent_distractors", "present without intent");
    }

    for (size_t i = 0; i < inst.distractor_labels.size(); ++i) {
        const auto& d = inst.distractor_labels[i];
        std::string path = "distractor_labels[" + std::to_string(i) + "]";
        if (d.id.empty()) add(path + ".id", "must be non-empty");
        if (!d.id.empty() && !label_ids.insert(d.id).second) add(path + ".id", "duplicate label id '" + d.id + "'");
        if (d.caption.empty()) add(path + ".caption", "must be non-empty");
        const VideoMeta* vm = inst.find_video(d.video_id);
        if (!vm) add(path + ".video_id", "unknown video '" + d.video_id + "'");
        if (d.subtype == "lexical") {
            if (!d.interval) {
                add(path + ".interval", "required for lexical distractors");
            } else if (vm) {
                if (d.interval->start_s < 0) add(path + ".interval.start_s", "must be >= 0");
                if (d.interval->end_s < d.interval->start_s) add(path + ".interval.end_s", "must be >= start_s");
                if (d.interval->end_s > vm->duration_s + 1e-9)
                    add(path + ".interval.end_s", "exceeds video duration");
            }
        } else if (d.subtype == "scene") {
            if (d.interval) add(path + ".interval", "scene distractors are video-scoped, interval not allowed");
        } else {
            add(path + ".subtype", "expected 'lexical' or 'scene'");
        }
        // a distractor caption colliding with a true label within its scope
        // would poison every question built from it, so check it here
        std::string norm = normalize_caption(d.caption);
        for (const auto& t : inst.true_labels) {
            if (t.video_id != d.video_id || t.kind != d.kind) continue;
            if (normalize_caption(t.caption) != norm) continue;
            bool collides = d.subtype == "scene" ||
                            (d.interval && (interval_overlap(*d.interval, t.interval) > 0 ||
                                            (t.interval.length() < kPointEps &&
                                             t.interval.midpoint() >= d.interval->start_s &&
                                             t.interval.midpoint() <= d.interval->end_s)));
            if (collides) {
                add(path + ".caption", "matches true label '" + t.id + "' within scope");
                break;
            }
        }
        if (d.source_label) {
            bool found = false;
            for (const auto& t : inst.true_labels)
                if (t.id == *d.source_label) { found = true; break; }
            if (!found) add(path + ".source_label", "unknown label '" + *d.source_label + "'");
        }
    }

    std::sort(out.begin(), out.end(), [](const Violation& a, const Violation& b) {
        return std::tie(a.path, a.message) < std::tie(b.path, b.message);
    });
    return out;
}

// ---------------------------------------------------------------------------
// window queries

bool label_in_window(const TrueLabel& label, const TimeInterval& window, double min_overlap) {
    if (label.interval.length() < kPointEps) {
        double m = label.interval.midpoint();
        return m >= window.start_s && m <= window.end_s;
    }
    return interval_overlap(label.interval, window) >= min_overlap;
}

std::vector<TrueLabel> labels_in_window(const AnnotationInstance& inst, std::string_view video_id,
                                        EntityKind kind, const TimeInterval& window,
                                        double min_overlap) {
    if (!inst.find_video(video_id))
        throw std::invalid_argument("labels_in_window: unknown video '" + std::string(video_id) + "'");
    std::vector<TrueLabel> out;
    for (const auto& t : inst.true_labels)
        if (t.video_id == video_id && t.kind == kind && label_in_window(t, window, min_overlap))
            out.push_back(t);
    std::sort(out.begin(), out.end(), [](const TrueLabel& a, const TrueLabel& b) {
        return std::tie(a.interval.start_s, a.id) < std::tie(b.interval.start_s, b.id);
    });
    return out;
}

// ---------------------------------------------------------------------------
// density / distribution

std::map<EntityKind, KindStats> label_distribution(const AnnotationInstance& inst) {
    return label_distribution(std::vector<AnnotationInstance>{inst});
}

std::map<EntityKind, KindStats> label_distribution(const std::vector<AnnotationInstance>& corpus) {
    std::map<EntityKind, KindStats> out;
    for (EntityKind k : kAllKinds) out[k] = {0, 0.0};
    int64_t total = 0;
    for (const auto& inst : corpus)
        for (const auto& t : inst.true_labels) {
            out[t.kind].count++;
            total++;
        }
    if (total > 0)
        for (auto& [k, s] : out) s.share = static_cast<double>(s.count) / static_cast<double>(total);
    return out;
}

static double instance_seconds(const AnnotationInstance& inst, DensityTimeMode mode) {
    double sum = 0.0, mx = 0.0;
    for (const auto& v : inst.videos) {
        sum += v.duration_s;
        mx = std::max(mx, v.duration_s);
    }
    // a synced group shares one wall clock, so the alternative accounting
    // counts the group once
    if (mode == DensityTimeMode::MaxPerSyncGroup && inst.synced) return mx;
    return sum;
}

DensityStats decision_density(const std::vector<AnnotationInstance>& corpus, DensityTimeMode mode) {
    DensityStats s;
    for (const auto& inst : corpus) {
        s.n_labels += static_cast<int64_t>(inst.true_labels.size());
        s.total_seconds += instance_seconds(inst, mode);
    }
    if (s.total_seconds <= 0.0) throw std::domain_error("decision_density: total duration is zero");
    s.rho = static_cast<double>(s.n_labels) / s.total_seconds;
    s.per_kind = label_distribution(corpus);
    return s;
}

DensityStats decision_density(const AnnotationInstance& inst, DensityTimeMode mode) {
    return decision_density(std::vector<AnnotationInstance>{inst}, mode);
}

// ---------------------------------------------------------------------------
// synthetic instances

namespace {

const std::vector<std::string>& caption_pool(EntityKind k) {
    static const std::vector<std::string> sa = {
        "reloads the rifle",        "jumps over a barricade", "opens the supply crate",
        "throws a smoke grenade",   "switches to the sidearm", "sprints across the bridge",
        "crouches behind cover",    "plants the beacon"};
    static const std::vector<std::string> ss = {
        "health is critically low", "shield is fully charged", "carrying the flag",
        "stamina is drained",       "marked by a scanner",     "armor is broken",
        "ammo pouch is full",       "cloaked by the field"};
    static const std::vector<std::string> oa = {
        "revives a downed ally",    "fires from the watchtower", "drives the buggy",
        "captures the objective",   "lobs a frag grenade",       "snipes from the ridge",
        "repairs the turret",       "flanks through the tunnel"};
    static const std::vector<std::string> os = {
        "stunned by the trap",      "low on ammunition",     "carrying extra armor",
        "blinded by the flash",     "out of stamina",        "holding the point",
        "poisoned by the gas",      "shielded by a barrier"};
    static const std::vector<std::string> wo = {
        "red supply crate",         "armored truck",         "sniper tower",
        "fuel barrel",              "ammo cache",            "radar dish",
        "wooden barricade",         "zipline anchor"};
    static const std::vector<std::string> we = {
        "the storm circle closes",  "an airdrop lands",      "the bridge collapses",
        "a sandstorm rolls in",     "the alarm is triggered", "reinforcements arrive",
        "the generator explodes",   "night falls over the map"};
    switch (k) {
        case EntityKind::SA: return sa;
        case EntityKind::SS: return ss;
        case EntityKind::OA: return oa;
        case EntityKind::OS: return os;
        case EntityKind::WO: return wo;
        case EntityKind::WE: return we;
    }
    return sa;
}

}  // namespace

AnnotationInstance synth_instance(const SynthParams& params) {
    if (params.n_videos < 1) throw std::invalid_argument("synth_instance: n_videos must be >= 1");
    if (params.duration_s <= 0) throw std::invalid_argument("synth_instance: duration_s must be > 0");

    AnnotationInstance inst;
    inst.instance_id = params.instance_id.empty() ? "synth-" + std::to_string(params.seed)
                                                  : params.instance_id;
    inst.synced = params.n_videos > 1;

    static const std::vector<std::string> games = {"arena-shooter", "battle-royale", "moba",
                                                   "racing-sim"};
    static const std::vector<std::string> actors = {"teammate", "enemy scout", "squad leader"};
    const std::string game = games[params.seed % games.size()];

    for (int v = 1; v <= params.n_videos; ++v) {
        VideoMeta m;
        m.video_id = inst.instance_id + "-v" + std::to_string(v);
        m.game = game;
        m.duration_s = params.duration_s;
        m.pov_index = v;
        m.sync_offset_s = (v - 1) * 1.5;
        inst.videos.push_back(std::move(m));
    }

    for (int v = 1; v <= params.n_videos; ++v) {
        const std::string vid = inst.videos[static_cast<size_t>(v - 1)].video_id;
        const std::string vtag = "#v" + std::to_string(v);
        for (EntityKind kind : kAllKinds) {
            auto itc = params.per_kind_counts.find(kind);
            int n = itc == params.per_kind_counts.end() ? 0 : itc->second;
            SplitRng rng(params.seed, "synth/" + inst.instance_id + "/" + vid + "/" + to_string(kind));
            const auto& pool = caption_pool(kind);

            bool groupable = kind == EntityKind::SA || kind == EntityKind::OA || kind == EntityKind::WE;
            int group = (groupable && params.count_group_size >= 2 && n >= params.count_group_size)
                            ? params.count_group_size
                            : 0;
            if (group > 0) {
                double slot = params.duration_s / group;
                if (slot < 1.8)
                    throw std::invalid_argument("synth_instance: count group does not fit duration");
                std::string gcap = pool[0] + " (recurring) " + vtag;
                std::string gkey = "grp-" + to_string(kind) + "-v" + std::to_string(v);
                for (int i = 0; i < group; ++i) {
                    TrueLabel t;
                    t.id = inst.instance_id + "-v" + std::to_string(v) + "-" + to_string(kind) + "-t" +
                           std::to_string(i);
                    t.video_id = vid;
                    t.kind = kind;
                    t.caption = gcap;
                    t.group_key = gkey;
                    double len = 0.6 + 0.8 * rng.unit();
                    double head = i * slot + 0.1;
                    double freedom = std::max(0.0, slot - len - 0.3);
                    t.interval.start_s = head + freedom * rng.unit();
                    t.interval.end_s = t.interval.start_s + len;
                    if (kind == EntityKind::OA) t.actor = actors[static_cast<size_t>(i) % actors.size()];
                    inst.true_labels.push_back(std::move(t));
                }
            }

            for (int i = group; i < n; ++i) {
                TrueLabel t;
                t.id = inst.instance_id + "-v" + std::to_string(v) + "-" + to_string(kind) + "-t" +
                       std::to_string(i);
                t.video_id = vid;
                t.kind = kind;
                t.caption = pool[static_cast<size_t>(i) % pool.size()] + " " + vtag + "-" +
                            std::to_string(i);
                double len = 0.5 + 2.5 * rng.unit();
                len = std::min(len, params.duration_s * 0.4);
                double start;
                if (rng.unit() < params.overlap_bias && !inst.true_labels.empty()) {
                    const TrueLabel& prev =
                        inst.true_labels[static_cast<size_t>(rng.below(inst.true_labels.size()))];
                    start = prev.interval.start_s + (rng.unit() - 0.3) * 1.5;
                } else {
                    start = rng.uniform(0.0, params.duration_s - len);
                }
                start = std::max(0.0, std::min(start, params.duration_s - len));
                t.interval = {start, start + len};
                if (kind == EntityKind::OA || kind == EntityKind::OS)
                    t.actor = actors[static_cast<size_t>(i) % actors.size()];
                bool actionish = kind == EntityKind::SA || kind == EntityKind::OA;
                if (actionish && params.intent_every > 0 && (i % params.intent_every) == params.intent_every - 1) {
                    std::string tag = " " + vtag + "-" + std::to_string(i);
                    t.intent = "to secure the objective" + tag;
                    t.intent_distractors = {"to bait an enemy push" + tag,
                                            "to conserve ammunition" + tag,
                                            "to scout the flank" + tag};
                }
                if (kind == EntityKind::WO && params.quantity_every > 0 &&
                    (i % params.quantity_every) == params.quantity_every - 1)
                    t.quantity = 2 + (i / params.quantity_every) % 5;
                inst.true_labels.push_back(std::move(t));
            }

            auto itd = params.distractor_counts.find(kind);
            int n_lex = itd == params.distractor_counts.end() ? 0 : itd->second.first;
            int n_scene = itd == params.distractor_counts.end() ? 0 : itd->second.second;
            std::vector<const TrueLabel*> own;
            for (const auto& t : inst.true_labels)
                if (t.video_id == vid && t.kind == kind) own.push_back(&t);
            for (int j = 0; j < n_lex; ++j) {
                DistractorLabel d;
                d.id = inst.instance_id + "-v" + std::to_string(v) + "-" + to_string(kind) + "-dl" +
                       std::to_string(j);
                d.video_id = vid;
                d.kind = kind;
                d.caption = pool[static_cast<size_t>(j + 3) % pool.size()] + " (variant) " + vtag + "-" +
                            std::to_string(j);
                if (!own.empty()) {
                    const TrueLabel* src = own[static_cast<size_t>(j) % own.size()];
                    d.interval = src->interval;
                    d.source_label = src->id;
                } else {
                    double start = rng.uniform(0.0, std::max(0.1, params.duration_s - 1.0));
                    d.interval = {start, std::min(params.duration_s, start + 1.0)};
                }
                d.subtype = "lexical";
                inst.distractor_labels.push_back(std::move(d));
            }
            for (int j = 0; j < n_scene; ++j) {
                DistractorLabel d;
                d.id = inst.instance_id + "-v" + std::to_string(v) + "-" + to_string(kind) + "-ds" +
                       std::to_string(j);
                d.video_id = vid;
                d.kind = kind;
                d.caption = pool[static_cast<size_t>(j + 5) % pool.size()] + " (offscreen) " + vtag +
                            "-" + std::to_string(j);
                d.subtype = "scene";
                inst.distractor_labels.push_back(std::move(d));
            }
        }
    }
    return inst;
}

}  // namespace povqa
