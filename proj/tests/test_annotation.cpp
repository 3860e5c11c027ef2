#include <algorithm>
#include <cmath>
#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "povqa/annotation.hpp"
#include "support/fixtures.hpp"

using namespace povqa;

namespace {

// Builds a corpus whose per-kind label counts and total seconds are chosen by
// the caller; only the fields consulted by the density/distribution helpers
// are populated.
AnnotationInstance counted_instance(const std::string& id, double duration,
                                    const std::map<EntityKind, int>& counts) {
    AnnotationInstance inst;
    inst.instance_id = id;
    VideoMeta v;
    v.video_id = id + "-v1";
    v.game = "g";
    v.duration_s = duration;
    v.pov_index = 1;
    inst.videos.push_back(v);
    int n = 0;
    for (const auto& [kind, c] : counts)
        for (int i = 0; i < c; ++i) {
            TrueLabel t;
            t.id = id + "-t" + std::to_string(n++);
            t.video_id = v.video_id;
            t.kind = kind;
            t.caption = "c";
            t.interval = {0.0, 1.0};
            inst.true_labels.push_back(std::move(t));
        }
    return inst;
}

const std::map<EntityKind, int> kCorpusCounts = {
    {EntityKind::SA, 658}, {EntityKind::SS, 729}, {EntityKind::OA, 160},
    {EntityKind::OS, 190}, {EntityKind::WO, 555}, {EntityKind::WE, 417}};

}  // namespace

TEST_CASE("decision density matches the reference corpus figures") {
    // 2709 labels over 2219.41 seconds of footage.
    AnnotationInstance one = counted_instance("corpus", 2219.41, kCorpusCounts);
    DensityStats s = decision_density(one);
    CHECK(s.n_labels == 2709);
    CHECK(s.total_seconds == doctest::Approx(2219.41));
    CHECK(std::abs(s.rho - 1.2206) < 1e-3);

    SUBCASE("the same totals split across several instances agree") {
        std::vector<AnnotationInstance> corpus;
        corpus.push_back(counted_instance("a", 1000.0, {{EntityKind::SA, 658}, {EntityKind::SS, 729}}));
        corpus.push_back(counted_instance("b", 1000.0, {{EntityKind::OA, 160}, {EntityKind::OS, 190}}));
        corpus.push_back(counted_instance("c", 219.41, {{EntityKind::WO, 555}, {EntityKind::WE, 417}}));
        DensityStats split = decision_density(corpus);
        CHECK(split.n_labels == 2709);
        CHECK(split.rho == doctest::Approx(s.rho));
    }
}

TEST_CASE("per-kind label shares match the reference distribution") {
    auto dist = label_distribution(counted_instance("corpus", 2219.41, kCorpusCounts));
    const std::map<EntityKind, double> expected_pct = {
        {EntityKind::SA, 24.3}, {EntityKind::SS, 26.9}, {EntityKind::OA, 5.9},
        {EntityKind::OS, 7.0},  {EntityKind::WO, 20.5}, {EntityKind::WE, 15.4}};
    double sum = 0.0;
    for (EntityKind k : kAllKinds) {
        CHECK(dist.at(k).count == kCorpusCounts.at(k));
        CHECK(std::abs(dist.at(k).share * 100.0 - expected_pct.at(k)) < 0.1);
        sum += dist.at(k).share;
    }
    CHECK(sum == doctest::Approx(1.0));
}

TEST_CASE("label_distribution reports all kinds even when absent") {
    auto dist = label_distribution(counted_instance("x", 10.0, {{EntityKind::SA, 4}}));
    CHECK(dist.size() == 6);
    CHECK(dist.at(EntityKind::SA).count == 4);
    CHECK(dist.at(EntityKind::SA).share == doctest::Approx(1.0));
    CHECK(dist.at(EntityKind::WE).count == 0);
    CHECK(dist.at(EntityKind::WE).share == 0.0);
}

TEST_CASE("density time modes: synced groups count their wall clock once") {
    AnnotationInstance inst = counted_instance("sync", 100.0, {{EntityKind::SA, 90}});
    VideoMeta v2;
    v2.video_id = "sync-v2";
    v2.game = "g";
    v2.duration_s = 80.0;
    v2.pov_index = 2;
    inst.videos.push_back(v2);
    inst.synced = true;

    CHECK(decision_density(inst, DensityTimeMode::SumDurations).total_seconds == doctest::Approx(180.0));
    CHECK(decision_density(inst, DensityTimeMode::MaxPerSyncGroup).total_seconds == doctest::Approx(100.0));
    CHECK(decision_density(inst, DensityTimeMode::SumDurations).rho == doctest::Approx(0.5));
    CHECK(decision_density(inst, DensityTimeMode::MaxPerSyncGroup).rho == doctest::Approx(0.9));

    SUBCASE("an unsynced instance sums either way") {
        inst.synced = false;
        CHECK(decision_density(inst, DensityTimeMode::MaxPerSyncGroup).total_seconds ==
              doctest::Approx(180.0));
    }
}

TEST_CASE("decision_density rejects a zero-duration corpus") {
    CHECK_THROWS_AS(decision_density(std::vector<AnnotationInstance>{}), std::domain_error);
    AnnotationInstance empty;
    empty.instance_id = "z";
    CHECK_THROWS_AS(decision_density(empty), std::domain_error);
}

TEST_CASE("interval_overlap and interval_gap agree with an integer lattice oracle") {
    // Quarter-second lattice: every endpoint is i * 0.25, which is exact in
    // binary floating point, so the comparisons below are equality, not
    // approximation.
    const double step = 0.25;
    const int hi = 9;
    for (int s1 = 0; s1 <= hi; ++s1)
        for (int e1 = s1; e1 <= hi; ++e1)
            for (int s2 = 0; s2 <= hi; ++s2)
                for (int e2 = s2; e2 <= hi; ++e2) {
                    TimeInterval a{s1 * step, e1 * step};
                    TimeInterval b{s2 * step, e2 * step};
                    int ov = std::max(0, std::min(e1, e2) - std::max(s1, s2));
                    int gp = std::max(0, std::max(s1, s2) - std::min(e1, e2));
                    CHECK(interval_overlap(a, b) == ov * step);
                    CHECK(interval_gap(a, b) == gp * step);
                    // symmetry and mutual exclusion
                    CHECK(interval_overlap(b, a) == interval_overlap(a, b));
                    CHECK(interval_gap(b, a) == interval_gap(a, b));
                    if (interval_overlap(a, b) > 0) CHECK(interval_gap(a, b) == 0.0);
                    if (interval_gap(a, b) > 0) CHECK(interval_overlap(a, b) == 0.0);
                }
}

TEST_CASE("interval helpers: touching intervals have zero overlap and zero gap") {
    CHECK(interval_overlap({0, 1}, {1, 2}) == 0.0);
    CHECK(interval_gap({0, 1}, {1, 2}) == 0.0);
    CHECK(interval_gap({0, 1}, {3, 5}) == 2.0);
    CHECK(interval_overlap({0, 10}, {2, 3}) == 1.0);  // nested
}

TEST_CASE("label_in_window: instants live or die by their midpoint") {
    TrueLabel point;
    point.interval = {10.0, 10.125};  // length 0.125 < 0.2 => instant
    CHECK(point.interval.length() < kPointEps);
    CHECK(label_in_window(point, {10.0625, 20.0}, 0.1));   // midpoint on the boundary
    CHECK(label_in_window(point, {0.0, 10.0625}, 0.1));    // upper boundary too
    CHECK_FALSE(label_in_window(point, {10.09375, 20.0}, 0.1));
    CHECK_FALSE(label_in_window(point, {0.0, 10.03125}, 0.1));
    // A huge min_overlap is irrelevant for instants.
    CHECK(label_in_window(point, {0.0, 60.0}, 1e9));
}

TEST_CASE("label_in_window: extended labels require min_overlap, inclusively") {
    TrueLabel ext;
    ext.interval = {0.0, 10.0};
    CHECK(label_in_window(ext, {9.75, 30.0}, 0.25));        // overlap exactly 0.25
    CHECK_FALSE(label_in_window(ext, {9.8125, 30.0}, 0.25));  // overlap 0.1875
    CHECK_FALSE(label_in_window(ext, {10.0, 30.0}, 0.25));    // touching only
    CHECK(label_in_window(ext, {2.0, 3.0}, 0.25));            // window inside the label
}

TEST_CASE("a label of length exactly 0.2 is not an instant") {
    TrueLabel t;
    t.interval = {0.0, 0.2};
    CHECK_FALSE(t.interval.length() < kPointEps);
    // Overlap with [0.15, 5] is ~0.05 < 0.1, so it must be excluded; midpoint
    // containment would have admitted it.
    CHECK_FALSE(label_in_window(t, {0.15, 5.0}, 0.1));
}

TEST_CASE("labels_in_window returns (start, id)-ordered hits and rejects unknown videos") {
    AnnotationInstance inst = fixtures::two_pov_instance();

    auto all = labels_in_window(inst, "fx-two-pov-v1", EntityKind::SA, {0.0, 60.0}, 0.1);
    REQUIRE(all.size() == 5);
    CHECK(all[0].id == "a1");
    CHECK(all[1].id == "a2");
    CHECK(all[2].id == "a3");
    CHECK(all[3].id == "a4");
    CHECK(all[4].id == "a5");

    auto mid = labels_in_window(inst, "fx-two-pov-v1", EntityKind::SA, {19.0, 31.0}, 0.1);
    REQUIRE(mid.size() == 2);
    CHECK(mid[0].id == "a3");   // [20,24] overlaps
    CHECK(mid[1].id == "a4");   // instant at 30.025

    auto none = labels_in_window(inst, "fx-two-pov-v2", EntityKind::WE, {0.0, 5.0}, 0.1);
    CHECK(none.empty());

    CHECK_THROWS_AS(labels_in_window(inst, "nope", EntityKind::SA, {0.0, 1.0}, 0.1),
                    std::invalid_argument);
}

TEST_CASE("ties in start_s are broken by label id") {
    AnnotationInstance inst = counted_instance("tie", 30.0, {});
    for (const char* id : {"zz", "aa", "mm"}) {
        TrueLabel t;
        t.id = id;
        t.video_id = "tie-v1";
        t.kind = EntityKind::WE;
        t.caption = std::string("event ") + id;
        t.interval = {5.0, 8.0};
        inst.true_labels.push_back(std::move(t));
    }
    auto hits = labels_in_window(inst, "tie-v1", EntityKind::WE, {0.0, 30.0}, 0.1);
    REQUIRE(hits.size() == 3);
    CHECK(hits[0].id == "aa");
    CHECK(hits[1].id == "mm");
    CHECK(hits[2].id == "zz");
}

TEST_CASE("serialize -> parse -> serialize is byte-identical") {
    AnnotationInstance inst = fixtures::two_pov_instance();
    std::string first = serialize_instance(inst);
    ParseResult parsed = parse_instance(first, /*strict=*/true);
    CHECK(parsed.warnings.empty());
    std::string second = serialize_instance(parsed.instance);
    CHECK(first == second);
    CHECK(first.back() == '\n');
}

TEST_CASE("canonical serialization is key-sorted and stable") {
    AnnotationInstance inst = fixtures::time_decoy_instance();
    std::string a = serialize_instance(inst);
    std::string b = serialize_instance(inst);
    CHECK(a == b);
    // key order inside the top-level object
    CHECK(a.find("\"distractor_labels\"") < a.find("\"instance_id\""));
    CHECK(a.find("\"instance_id\"") < a.find("\"synced\""));
    CHECK(a.find("\"synced\"") < a.find("\"true_labels\""));
    CHECK(a.find("\"true_labels\"") < a.find("\"videos\""));
}

TEST_CASE("parse_instance surfaces unknown fields as warnings, not errors") {
    AnnotationInstance inst = fixtures::time_decoy_instance();
    json doc = instance_to_json(inst);
    doc["annotator_note"] = "checked twice";
    doc["videos"][0]["frame_rate"] = 30;
    ParseResult out = parse_instance(doc.dump(), /*strict=*/true);
    REQUIRE(out.warnings.size() == 2);
    std::string joined = out.warnings[0] + "|" + out.warnings[1];
    CHECK(joined.find("annotator_note") != std::string::npos);
    CHECK(joined.find("frame_rate") != std::string::npos);
    CHECK(out.instance.videos[0].duration_s == doctest::Approx(60.0));
}

TEST_CASE("parse_instance: malformed bytes raise ParseError") {
    CHECK_THROWS_AS(parse_instance("{ not json"), ParseError);
    CHECK_THROWS_AS(parse_instance(""), ParseError);
    CHECK_THROWS_AS(parse_instance("[1,2,3]"), ParseError);  // not an object
}

TEST_CASE("parse_instance: structural violations raise ValidationError even when lax") {
    // Missing required fields is a structural problem, reported sorted.
    try {
        parse_instance(R"({"instance_id":"x"})", /*strict=*/false);
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        REQUIRE(e.violations.size() == 4);
        CHECK(e.violations[0].path == "instance.distractor_labels");
        CHECK(e.violations[1].path == "instance.synced");
        CHECK(e.violations[2].path == "instance.true_labels");
        CHECK(e.violations[3].path == "instance.videos");
        for (const auto& v : e.violations) CHECK(v.message == "required field missing");
    }
}

TEST_CASE("parse_instance: strict mode additionally enforces semantic invariants") {
    // Structurally complete but semantically broken: OA label without actor.
    json doc = instance_to_json(fixtures::time_decoy_instance());
    doc["true_labels"][0]["kind"] = "OA";
    CHECK_THROWS_AS(parse_instance(doc.dump(), /*strict=*/true), ValidationError);
    // Lax parse accepts it.
    ParseResult lax = parse_instance(doc.dump(), /*strict=*/false);
    CHECK(lax.instance.true_labels[0].kind == EntityKind::OA);
}

TEST_CASE("validate_instance: the violation table") {
    using fixtures::tl;

    SUBCASE("clean fixture instances have no violations") {
        CHECK(validate_instance(fixtures::two_pov_instance()).empty());
        CHECK(validate_instance(fixtures::order_mv_instance()).empty());
        CHECK(validate_instance(fixtures::time_decoy_instance()).empty());
    }

    SUBCASE("empty instance id, no videos") {
        AnnotationInstance inst;
        auto v = validate_instance(inst);
        REQUIRE(v.size() == 2);
        CHECK(v[0].path == "instance.instance_id");
        CHECK(v[0].message == "must be non-empty");
        CHECK(v[1].path == "instance.videos");
        CHECK(v[1].message == "must contain at least one video");
    }

    SUBCASE("synced needs two videos") {
        AnnotationInstance inst = fixtures::time_decoy_instance();
        inst.synced = true;
        auto v = validate_instance(inst);
        REQUIRE(v.size() == 1);
        CHECK(v[0].path == "instance.synced");
        CHECK(v[0].message == "synced instance needs >= 2 videos");
    }

    SUBCASE("duplicate video ids and pov indices") {
        AnnotationInstance inst = fixtures::time_decoy_instance();
        inst.videos.push_back(inst.videos[0]);
        auto v = validate_instance(inst);
        REQUIRE(v.size() == 2);
        CHECK(v[0].path == "videos[1].pov_index");
        CHECK(v[0].message == "duplicate pov index 1");
        CHECK(v[1].path == "videos[1].video_id");
        CHECK(v[1].message == "duplicate video id 'fx-time-decoys-x1'");
    }

    SUBCASE("video duration and pov bounds") {
        AnnotationInstance inst;
        inst.instance_id = "b";
        VideoMeta m;
        m.video_id = "b-v1";
        m.duration_s = 0.0;
        m.pov_index = 0;
        inst.videos.push_back(m);
        auto v = validate_instance(inst);
        REQUIRE(v.size() == 2);
        CHECK(v[0].path == "videos[0].duration_s");
        CHECK(v[0].message == "must be > 0");
        CHECK(v[1].path == "videos[0].pov_index");
        CHECK(v[1].message == "must be >= 1");
    }

    SUBCASE("label interval must sit inside the video") {
        AnnotationInstance inst = fixtures::time_decoy_instance();
        inst.true_labels[0].interval = {-1.0, 70.0};
        auto v = validate_instance(inst);
        REQUIRE(v.size() == 2);
        CHECK(v[0].path == "true_labels[0].interval.end_s");
        CHECK(v[0].message == "exceeds video duration");
        CHECK(v[1].path == "true_labels[0].interval.start_s");
        CHECK(v[1].message == "must be >= 0");

        inst.true_labels[0].interval = {5.0, 4.0};
        v = validate_instance(inst);
        REQUIRE(v.size() == 1);
        CHECK(v[0].message == "must be >= start_s");
    }

    SUBCASE("label ids share one namespace with distractors") {
        AnnotationInstance inst = fixtures::time_decoy_instance();
        DistractorLabel d;
        d.id = "s1";  // collides with a true label id
        d.video_id = "fx-time-decoys-x1";
        d.kind = EntityKind::WE;
        d.caption = "a ghast appears";
        d.subtype = "scene";
        inst.distractor_labels.push_back(d);
        auto v = validate_instance(inst);
        REQUIRE(v.size() == 1);
        CHECK(v[0].path == "distractor_labels[0].id");
        CHECK(v[0].message == "duplicate label id 's1'");
    }

    SUBCASE("OA/OS labels need an actor") {
        AnnotationInstance inst = fixtures::time_decoy_instance();
        inst.true_labels[0].kind = EntityKind::OS;
        auto v = validate_instance(inst);
        REQUIRE(v.size() == 1);
        CHECK(v[0].path == "true_labels[0].actor");
        CHECK(v[0].message == "required for OA/OS labels");
    }

    SUBCASE("quantity is WO-only and positive") {
        AnnotationInstance inst = fixtures::time_decoy_instance();
        inst.true_labels[0].quantity = 2;  // on a WE label
        auto v = validate_instance(inst);
        REQUIRE(v.size() == 1);
        CHECK(v[0].message == "only valid on WO labels");

        inst.true_labels[0].kind = EntityKind::WO;
        inst.true_labels[0].quantity = 0;
        v = validate_instance(inst);
        REQUIRE(v.size() == 1);
        CHECK(v[0].message == "must be >= 1");
    }

    SUBCASE("intent is SA/OA-only, distractor intents need an intent") {
        AnnotationInstance inst = fixtures::time_decoy_instance();
        inst.true_labels[0].intent = "to farm experience";  // WE label
        auto v = validate_instance(inst);
        REQUIRE(v.size() == 1);
        CHECK(v[0].message == "only valid on SA/OA labels");

        inst.true_labels[0].intent.reset();
        inst.true_labels[0].intent_distractors = {"to idle"};
        v = validate_instance(inst);
        REQUIRE(v.size() == 1);
        CHECK(v[0].message == "present without intent");
    }

    SUBCASE("lexical distractors need an in-bounds interval, scene must not have one") {
        AnnotationInstance inst = fixtures::time_decoy_instance();
        DistractorLabel lex;
        lex.id = "d-lex";
        lex.video_id = "fx-time-decoys-x1";
        lex.kind = EntityKind::WE;
        lex.caption = "a blaze spawns";
        lex.subtype = "lexical";
        inst.distractor_labels.push_back(lex);
        auto v = validate_instance(inst);
        REQUIRE(v.size() == 1);
        CHECK(v[0].message == "required for lexical distractors");

        inst.distractor_labels[0].interval = TimeInterval{50.0, 90.0};
        v = validate_instance(inst);
        REQUIRE(v.size() == 1);
        CHECK(v[0].message == "exceeds video duration");

        inst.distractor_labels[0].subtype = "scene";
        inst.distractor_labels[0].interval = TimeInterval{1.0, 2.0};
        v = validate_instance(inst);
        REQUIRE(v.size() == 1);
        CHECK(v[0].message == "scene distractors are video-scoped, interval not allowed");

        inst.distractor_labels[0].subtype = "spooky";
        inst.distractor_labels[0].interval.reset();
        v = validate_instance(inst);
        REQUIRE(v.size() == 1);
        CHECK(v[0].message == "expected 'lexical' or 'scene'");
    }

    SUBCASE("distractor captions may not collide with true labels in scope") {
        AnnotationInstance inst = fixtures::time_decoy_instance();
        DistractorLabel d;
        d.id = "d-col";
        d.video_id = "fx-time-decoys-x1";
        d.kind = EntityKind::WE;
        d.caption = "A  Wither Skeleton   spawns";  // normalizes to the true caption
        d.subtype = "scene";
        inst.distractor_labels.push_back(d);
        auto v = validate_instance(inst);
        REQUIRE(v.size() == 1);
        CHECK(v[0].path == "distractor_labels[0].caption");
        CHECK(v[0].message == "matches true label 's1' within scope");

        // A lexically identical caption on a *disjoint* interval is fine.
        inst.distractor_labels[0].subtype = "lexical";
        inst.distractor_labels[0].interval = TimeInterval{20.0, 25.0};
        CHECK(validate_instance(inst).empty());

        // ... but overlapping the occurrence is a collision again.
        inst.distractor_labels[0].interval = TimeInterval{11.0, 13.0};
        v = validate_instance(inst);
        REQUIRE(v.size() == 1);
        CHECK(v[0].message == "matches true label 's1' within scope");
    }

    SUBCASE("source_label must reference an existing true label") {
        AnnotationInstance inst = fixtures::time_decoy_instance();
        DistractorLabel d;
        d.id = "d-src";
        d.video_id = "fx-time-decoys-x1";
        d.kind = EntityKind::WE;
        d.caption = "an iron golem spawns";
        d.subtype = "lexical";
        d.interval = TimeInterval{10.0, 12.0};
        d.source_label = "ghost";
        inst.distractor_labels.push_back(d);
        auto v = validate_instance(inst);
        REQUIRE(v.size() == 1);
        CHECK(v[0].path == "distractor_labels[0].source_label");
        CHECK(v[0].message == "unknown label 'ghost'");
    }

    SUBCASE("violations arrive sorted by (path, message)") {
        AnnotationInstance inst;
        inst.instance_id = "";
        auto v = validate_instance(inst);
        CHECK(std::is_sorted(v.begin(), v.end(), [](const Violation& a, const Violation& b) {
            return std::tie(a.path, a.message) < std::tie(b.path, b.message);
        }));
    }
}

TEST_CASE("synth_instance is deterministic, valid, and delivers the requested counts") {
    SynthParams p;
    p.n_videos = 2;
    p.duration_s = 90.0;
    p.seed = 41;
    p.intent_every = 1;  // every non-recurring SA/OA label carries an intent
    for (EntityKind k : kAllKinds) p.per_kind_counts[k] = 4;
    p.distractor_counts[EntityKind::SA] = {2, 1};
    p.distractor_counts[EntityKind::WE] = {1, 2};

    AnnotationInstance a = synth_instance(p);
    AnnotationInstance b = synth_instance(p);
    CHECK(serialize_instance(a) == serialize_instance(b));

    SynthParams p2 = p;
    p2.seed = 42;
    CHECK(serialize_instance(a) != serialize_instance(synth_instance(p2)));

    CHECK(validate_instance(a).empty());
    CHECK(a.instance_id == "synth-41");
    CHECK(a.synced);
    REQUIRE(a.videos.size() == 2);
    CHECK(a.videos[0].pov_index == 1);
    CHECK(a.videos[1].pov_index == 2);
    CHECK(a.videos[1].sync_offset_s == doctest::Approx(1.5));

    // 4 labels per kind per video.
    auto dist = label_distribution(a);
    for (EntityKind k : kAllKinds) CHECK(dist.at(k).count == 8);

    // (lexical, scene) distractor counts per video.
    int sa_lex = 0, sa_scene = 0, we_lex = 0, we_scene = 0;
    for (const auto& d : a.distractor_labels) {
        if (d.kind == EntityKind::SA) (d.subtype == "lexical" ? sa_lex : sa_scene)++;
        if (d.kind == EntityKind::WE) (d.subtype == "lexical" ? we_lex : we_scene)++;
    }
    CHECK(sa_lex == 4);
    CHECK(sa_scene == 2);
    CHECK(we_lex == 2);
    CHECK(we_scene == 4);

    // Recurring groups exist for the groupable kinds (enables COUNT questions).
    bool sa_group = false;
    for (const auto& t : a.true_labels)
        if (t.kind == EntityKind::SA && t.group_key) sa_group = true;
    CHECK(sa_group);

    // Intents appear on the configured cadence.
    bool has_intent = false;
    for (const auto& t : a.true_labels)
        if (t.intent) {
            has_intent = true;
            CHECK(t.intent_distractors.size() == 3);
        }
    CHECK(has_intent);
}

TEST_CASE("synth_instance rejects impossible requests") {
    SynthParams bad;
    bad.n_videos = 0;
    CHECK_THROWS_AS(synth_instance(bad), std::invalid_argument);

    SynthParams flat;
    flat.duration_s = 0.0;
    CHECK_THROWS_AS(synth_instance(flat), std::invalid_argument);

    SynthParams cramped;
    cramped.duration_s = 5.0;  // 3-wide count group needs >= 1.8 s per slot
    cramped.per_kind_counts[EntityKind::SA] = 3;
    CHECK_THROWS_AS(synth_instance(cramped), std::invalid_argument);
}

TEST_CASE("synth_instance output parses strictly under many seeds") {
    for (uint64_t seed : {1ull, 2ull, 3ull, 10ull, 99ull}) {
        SynthParams p;
        p.seed = seed;
        p.n_videos = 1 + static_cast<int>(seed % 3);
        p.duration_s = 45.0 + 7.0 * static_cast<double>(seed % 5);
        for (EntityKind k : kAllKinds) p.per_kind_counts[k] = static_cast<int>(1 + seed % 4);
        p.distractor_counts[EntityKind::OA] = {1, 1};
        AnnotationInstance inst = synth_instance(p);
        CHECK_NOTHROW(parse_instance(serialize_instance(inst), /*strict=*/true));
    }
}

TEST_CASE("normalize_caption lowercases and collapses whitespace") {
    CHECK(normalize_caption("Mine the  IRON ore") == "mine the iron ore");
    CHECK(normalize_caption("  padded   out\t\n") == "padded out");
    CHECK(normalize_caption("") == "");
    CHECK(normalize_caption("   ") == "");
    CHECK(normalize_caption("unchanged") == "unchanged");
}

TEST_CASE("format_timestamp floors the start and ceils the end") {
    CHECK(format_timestamp({3.2, 5.8}) == "[00:03 to 00:06]");
    CHECK(format_timestamp({10.0, 12.0}) == "[00:10 to 00:12]");
    CHECK(format_timestamp({59.9, 61.2}) == "[00:59 to 01:02]");
    CHECK(format_timestamp({125.0, 180.5}) == "[02:05 to 03:01]");
    CHECK(format_timestamp({0.0, 0.0}) == "[00:00 to 00:00]");
}

TEST_CASE("entity kind names round-trip") {
    for (EntityKind k : kAllKinds) {
        auto parsed = parse_kind(to_string(k));
        REQUIRE(parsed.has_value());
        CHECK(*parsed == k);
    }
    CHECK_FALSE(parse_kind("XX").has_value());
    CHECK_FALSE(parse_kind("sa").has_value());
    CHECK_FALSE(parse_kind("").has_value());
}
