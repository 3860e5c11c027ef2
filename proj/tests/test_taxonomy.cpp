#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "povqa/generator.hpp"
#include "povqa/taxonomy.hpp"

using namespace povqa;
using namespace povqa::taxonomy;

TEST_CASE("the built-in registry covers exactly the 222 codes of the grammar") {
    const TemplateRegistry& reg = TemplateRegistry::builtin();
    std::vector<std::string> codes = reg.all_codes();
    CHECK(codes.size() == 222);
    CHECK(std::is_sorted(codes.begin(), codes.end()));
    CHECK(std::set<std::string>(codes.begin(), codes.end()).size() == codes.size());

    int level1 = 0, level2 = 0, level3 = 0, windowed = 0, multi = 0;
    std::set<std::string> categories;
    for (const std::string& raw : codes) {
        QuestionCode c = parse_code(raw);  // never throws for registry codes
        CHECK(c.raw == raw);
        CHECK(reg.has(raw));
        CHECK_FALSE(reg.stem_template(raw).empty());
        TaskCategory cat = code_category(c);
        categories.insert(cat.name);
        CHECK(cat.level == c.level);           // category level mirrors code level
        CHECK(c.multi_video == (c.level == 3));  // exactly the sync-group codes
        if (c.level == 1) level1++;
        if (c.level == 2) level2++;
        if (c.level == 3) level3++;
        if (c.windowed()) windowed++;
        if (c.multi_video) multi++;
    }
    // 12 whole-clip recognition codes + WO-COUNT sit at level 1; the three
    // multi-video families (72 sync refs, 6 POV-ID, 3 MV orders) at level 3.
    CHECK(level1 == 13);
    CHECK(level2 == 128);
    CHECK(level3 == 81);
    CHECK(multi == 81);
    // 90 cross-entity + 18 timestamp + 72 cross-video refs + 6 TIME
    CHECK(windowed == 186);

    // every one of the fifteen categories is reachable, and nothing else
    auto names = all_category_names();
    CHECK(names.size() == 15);
    CHECK(categories == std::set<std::string>(names.begin(), names.end()));
}

TEST_CASE("parse_code: structured fields for each family") {
    SUBCASE("simple recognition") {
        QuestionCode c = parse_code("SA-IDENT");
        CHECK(c.level == 1);
        CHECK(c.form == QuestionForm::Ident);
        CHECK(c.ans_entity == EntityKind::SA);
        CHECK_FALSE(c.ref_entity.has_value());
        CHECK_FALSE(c.ref_timestamp);
        CHECK_FALSE(c.multi_video);
        CHECK_FALSE(c.windowed());

        CHECK(parse_code("WE-EXIST").level == 1);
        CHECK(parse_code("SS-ABSENT").level == 2);
        CHECK(parse_code("OS-TIME").level == 2);
        CHECK(parse_code("OS-TIME").windowed());  // TIME always carries a window
    }

    SUBCASE("counting: WO is level 1, recurrences are level 2, states are out") {
        CHECK(parse_code("WO-COUNT").level == 1);
        CHECK(parse_code("SA-COUNT").level == 2);
        CHECK(parse_code("OA-COUNT").level == 2);
        CHECK(parse_code("WE-COUNT").level == 2);
        CHECK_THROWS_AS(parse_code("SS-COUNT"), CodeError);
        CHECK_THROWS_AS(parse_code("OS-COUNT"), CodeError);
    }

    SUBCASE("intent is SA/OA only") {
        CHECK(parse_code("SA-INTENT").level == 2);
        CHECK(parse_code("OA-INTENT").level == 2);
        CHECK_THROWS_AS(parse_code("SS-INTENT"), CodeError);
        CHECK_THROWS_AS(parse_code("WE-INTENT"), CodeError);
        CHECK_THROWS_AS(parse_code("WO-INTENT"), CodeError);
    }

    SUBCASE("ordering: SA, OA or MIX, with an optional -MV") {
        QuestionCode sv = parse_code("SA-ORDER");
        CHECK(sv.level == 2);
        CHECK(sv.form == QuestionForm::Order);
        CHECK_FALSE(sv.multi_video);
        CHECK_FALSE(sv.ans_mix);
        CHECK(sv.ans_entity == EntityKind::SA);

        QuestionCode mix = parse_code("MIX-ORDER-MV");
        CHECK(mix.level == 3);
        CHECK(mix.multi_video);
        CHECK(mix.ans_mix);
        CHECK_FALSE(mix.ans_entity.has_value());

        CHECK_THROWS_AS(parse_code("WE-ORDER"), CodeError);
        CHECK_THROWS_AS(parse_code("SS-ORDER-MV"), CodeError);
    }

    SUBCASE("pov identification") {
        QuestionCode c = parse_code("WE-POV-ID");
        CHECK(c.level == 3);
        CHECK(c.form == QuestionForm::PovId);
        CHECK(c.multi_video);
        CHECK(c.ans_entity == EntityKind::WE);
        CHECK_FALSE(c.windowed());
        CHECK_THROWS_AS(parse_code("XX-POV-ID"), CodeError);
    }

    SUBCASE("cross-entity references need two different kinds") {
        QuestionCode c = parse_code("SS2SA-IDENT");
        CHECK(c.level == 2);
        CHECK(c.ref_entity == EntityKind::SS);
        CHECK(c.ans_entity == EntityKind::SA);
        CHECK(c.windowed());
        CHECK_FALSE(c.multi_video);

        CHECK_THROWS_AS(parse_code("SA2SA-IDENT"), CodeError);
        CHECK_THROWS_AS(parse_code("SA2SS-TIME"), CodeError);
        CHECK_THROWS_AS(parse_code("SA2SS-COUNT"), CodeError);
        CHECK_THROWS_AS(parse_code("XX2SA-IDENT"), CodeError);
        CHECK_THROWS_AS(parse_code("SA2XX-IDENT"), CodeError);
    }

    SUBCASE("timestamp references") {
        QuestionCode c = parse_code("TR2WE-ABSENT");
        CHECK(c.level == 2);
        CHECK(c.ref_timestamp);
        CHECK_FALSE(c.ref_entity.has_value());
        CHECK(c.ans_entity == EntityKind::WE);
        CHECK(c.windowed());
        CHECK_THROWS_AS(parse_code("TR2SA-COUNT"), CodeError);
        CHECK_THROWS_AS(parse_code("TR2SA-TIME"), CodeError);
    }

    SUBCASE("cross-video references allow matching kinds but only IDENT/EXIST") {
        QuestionCode c = parse_code("V1-WE2V2-SA-IDENT");
        CHECK(c.level == 3);
        CHECK(c.multi_video);
        CHECK(c.ref_entity == EntityKind::WE);
        CHECK(c.ans_entity == EntityKind::SA);
        CHECK(c.windowed());

        CHECK_NOTHROW(parse_code("V1-SA2V2-SA-EXIST"));  // same kind is fine here
        CHECK_THROWS_AS(parse_code("V1-SA2V2-SA-ABSENT"), CodeError);
        CHECK_THROWS_AS(parse_code("V1-SA-IDENT"), CodeError);
        CHECK_THROWS_AS(parse_code("V1-XX2V2-SA-IDENT"), CodeError);
    }

    SUBCASE("garbage is rejected") {
        for (const char* bad : {"", "SA", "MIX-IDENT", "XX-IDENT", "SA-FROB", "sa-ident",
                                "2SA-IDENT", "SA-IDENT-MV"}) {
            CHECK_THROWS_AS(parse_code(bad), CodeError);
        }
    }
}

TEST_CASE("code_category: spot checks per family") {
    auto cat = [](const char* raw) { return code_category(parse_code(raw)); };
    CHECK(cat("SA-IDENT").name == "Action Recognition");
    CHECK(cat("OA-EXIST").name == "Action Recognition");
    CHECK(cat("SS-IDENT").name == "State Recognition");
    CHECK(cat("OS-EXIST").name == "State Recognition");
    CHECK(cat("WO-IDENT").name == "Object Recognition");
    CHECK(cat("WE-EXIST").name == "Event Recognition");
    CHECK(cat("WO-COUNT").name == "Static Object Count");
    CHECK(cat("WO-COUNT").level == 1);
    CHECK(cat("WE-COUNT").name == "Occurrence Count");
    CHECK(cat("SA-ABSENT").name == "Absence Recognition");
    CHECK(cat("OA-INTENT").name == "Intent Identification");
    CHECK(cat("WE-TIME").name == "Time Localization");
    CHECK(cat("MIX-ORDER").name == "Ordering");
    CHECK(cat("MIX-ORDER-MV").name == "Cross-Video Ordering");
    CHECK(cat("SS-POV-ID").name == "POV Identification");
    CHECK(cat("OS2WE-ABSENT").name == "Cross-Entity Referring");
    CHECK(cat("TR2WO-EXIST").name == "Timestamp Referring");
    CHECK(cat("V1-OS2V2-OS-EXIST").name == "Sync-Referring");
    CHECK(cat("V1-OS2V2-OS-EXIST").level == 3);
}

TEST_CASE("render_stem: exact wording for representative codes") {
    auto render = [](const char* raw, const StemSlots& slots) {
        return render_stem(parse_code(raw), slots);
    };

    StemSlots s;
    s.caption = "mine the iron ore";
    CHECK(render("SA-EXIST", s) == "Did the POV player perform the action: \"mine the iron ore\"?");
    CHECK(render("SA-COUNT", s) ==
          "How many times did the POV player perform the action: \"mine the iron ore\"?");
    CHECK(render("SA-POV-ID", s) ==
          "Which video corresponds to the player who performed the action: \"mine the iron ore\"?");

    StemSlots wo;
    wo.caption = "iron ore vein";
    // the static-count stem splices the noun phrase in unquoted
    CHECK(render("WO-COUNT", wo) == "How many iron ore vein are there in the scene?");

    StemSlots other;
    other.other = "Rega";
    CHECK(render("OA-IDENT", other) ==
          "Which of the following actions did Rega perform during the video?");

    StemSlots plain;
    CHECK(render("SA-IDENT", plain) ==
          "Which of the following actions did the POV player perform during the video?");
    CHECK(render("SA-ORDER", plain) == "Which of the following actions happened first?");
    CHECK(render("OA-ORDER-MV", plain) == "Which of the following actions happened first?");
    CHECK(render("MIX-ORDER", plain) == "Which of the following happened first?");
    CHECK(render("MIX-ORDER-MV", plain) == "Which of the following happened first?");

    StemSlots tr;
    tr.timestamp = "[00:03 to 00:06]";
    CHECK(render("TR2WE-IDENT", tr) ==
          "During [00:03 to 00:06], which of the following events occurred?");

    // self-reference: an SS anchor already names the POV player, so the SA
    // answer clause switches to "they"
    StemSlots xe;
    xe.ref_caption = "holding a torch";
    CHECK(render("SS2SA-IDENT", xe) ==
          "When the POV player's \"holding a torch\", which of the following actions did they perform?");

    StemSlots we2oa;
    we2oa.ref_caption = "cave collapse";
    we2oa.other = "Rega";
    we2oa.caption = "attack the zombie";
    CHECK(render("WE2OA-EXIST", we2oa) ==
          "At the moment when the event \"cave collapse\" occurred, did Rega perform the action: "
          "\"attack the zombie\"?");

    // cross-video stems substitute the actual pov indices into POV1/POV2
    StemSlots mv;
    mv.ref_caption = "cave collapse";
    mv.video_indices = {1, 2};
    CHECK(render("V1-WE2V2-SA-IDENT", mv) ==
          "At the moment when the event \"cave collapse\" occurred in POV1, which of the following "
          "actions did POV2 player perform at the same time?");
    mv.video_indices = {2, 1};
    CHECK(render("V1-WE2V2-SA-IDENT", mv) ==
          "At the moment when the event \"cave collapse\" occurred in POV2, which of the following "
          "actions did POV1 player perform at the same time?");
}

TEST_CASE("render_stem: every failure mode is a RenderError") {
    StemSlots empty;
    // missing {caption}
    CHECK_THROWS_AS(render_stem(parse_code("SA-EXIST"), empty), RenderError);
    // missing {other}
    CHECK_THROWS_AS(render_stem(parse_code("OA-IDENT"), empty), RenderError);
    // missing {timestamp}
    CHECK_THROWS_AS(render_stem(parse_code("TR2SA-IDENT"), empty), RenderError);
    // POV tokens need two video indices
    StemSlots one_idx;
    one_idx.ref_caption = "x";
    one_idx.video_indices = {1};
    CHECK_THROWS_AS(render_stem(parse_code("V1-WE2V2-SA-IDENT"), one_idx), RenderError);

    // the error message names the first unfilled placeholder
    try {
        render_stem(parse_code("SA-EXIST"), empty);
        FAIL("expected RenderError");
    } catch (const RenderError& e) {
        CHECK(std::string(e.what()).find("{caption}") != std::string::npos);
    }

    // defective override templates
    auto broken = TemplateRegistry::builtin().with_overrides(
        {{"SA-IDENT", "Hello {bogus}"}, {"SS-IDENT", "Broken {caption"}});
    StemSlots s;
    s.caption = "x";
    CHECK_THROWS_AS(render_stem(parse_code("SA-IDENT"), s, broken), RenderError);
    CHECK_THROWS_AS(render_stem(parse_code("SS-IDENT"), s, broken), RenderError);
}

TEST_CASE("with_overrides: validates keys and replaces only those stems") {
    const TemplateRegistry& base = TemplateRegistry::builtin();
    CHECK_THROWS_AS(base.with_overrides({{"SA-BOGUS", "whatever"}}), CodeError);
    CHECK_THROWS_AS(base.with_overrides({{"", "whatever"}}), CodeError);

    auto reg = base.with_overrides({{"SA-EXIST", "Was \"{caption}\" done?"}});
    StemSlots s;
    s.caption = "jump";
    CHECK(render_stem(parse_code("SA-EXIST"), s, reg) == "Was \"jump\" done?");
    // untouched codes keep the builtin wording, and the builtin stays intact
    CHECK(render_stem(parse_code("SA-IDENT"), s, reg) ==
          "Which of the following actions did the POV player perform during the video?");
    CHECK(render_stem(parse_code("SA-EXIST"), s) ==
          "Did the POV player perform the action: \"jump\"?");

    CHECK(reg.all_codes().size() == 222);
}

TEST_CASE("stem_template throws for unknown codes") {
    CHECK_THROWS_AS(TemplateRegistry::builtin().stem_template("NOPE"), CodeError);
    CHECK_FALSE(TemplateRegistry::builtin().has("NOPE"));
}

TEST_CASE("build_context_window: timestamp windows round outward to whole seconds") {
    VideoMeta v;
    v.video_id = "v";
    v.duration_s = 100.0;
    v.sync_offset_s = 0.0;

    // the worked rounding example: [3.2, 5.8] -> [3, 6]
    TimeInterval w = gen::build_context_window({3.2, 5.8}, v, /*round_to_seconds=*/true);
    CHECK(w.start_s == doctest::Approx(3.0));
    CHECK(w.end_s == doctest::Approx(6.0));

    // un-rounded windows pass through
    TimeInterval raw = gen::build_context_window({3.2, 5.8}, v, false);
    CHECK(raw.start_s == doctest::Approx(3.2));
    CHECK(raw.end_s == doctest::Approx(5.8));

    // degenerate anchors widen to one second
    TimeInterval pt = gen::build_context_window({4.0, 4.0}, v, true);
    CHECK(pt.start_s == doctest::Approx(4.0));
    CHECK(pt.end_s == doctest::Approx(5.0));

    // starts clamp at zero
    TimeInterval neg = gen::build_context_window({-0.4, 0.3}, v, true);
    CHECK(neg.start_s == doctest::Approx(0.0));
    CHECK(neg.end_s == doctest::Approx(1.0));

    // the sync offset shifts the rounded window onto the shared clock
    v.sync_offset_s = 5.0;
    TimeInterval shifted = gen::build_context_window({3.2, 5.8}, v, true);
    CHECK(shifted.start_s == doctest::Approx(8.0));
    CHECK(shifted.end_s == doctest::Approx(11.0));
}

TEST_CASE("question form names round-trip through to_string") {
    CHECK(taxonomy::to_string(QuestionForm::Ident) == "IDENT");
    CHECK(taxonomy::to_string(QuestionForm::Exist) == "EXIST");
    CHECK(taxonomy::to_string(QuestionForm::Absent) == "ABSENT");
    CHECK(taxonomy::to_string(QuestionForm::Count) == "COUNT");
    CHECK(taxonomy::to_string(QuestionForm::Intent) == "INTENT");
    CHECK(taxonomy::to_string(QuestionForm::Time) == "TIME");
    CHECK(taxonomy::to_string(QuestionForm::Order) == "ORDER");
    CHECK(taxonomy::to_string(QuestionForm::PovId) == "POV-ID");
}
