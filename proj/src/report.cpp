#include "povqa/report.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <sstream>
#include <stdexcept>

#include "povqa/taxonomy.hpp"

namespace povqa::report {

namespace {

std::string pct(double accuracy) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.1f", accuracy * 100.0);
    return buf;
}

double ratio(int64_t correct, int64_t n) {
    return n == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(n);
}

const std::vector<std::string> kLengthBuckets = {"0-15s", "15-30s", "30-60s", "60s+"};
const std::vector<std::string> kEntityOrder = {"SA", "SS", "OA", "OS", "WO", "WE", "MIX"};
const std::vector<std::string> kSubtypeOrder = {"true",     "lexical", "scene",
                                                "temporal", "role",    "cross_video"};

std::string length_bucket(double seconds) {
    if (seconds < 15.0) return kLengthBuckets[0];
    if (seconds < 30.0) return kLengthBuckets[1];
    if (seconds < 60.0) return kLengthBuckets[2];
    return kLengthBuckets[3];
}

// Buckets a record lands in for one facet; empty = excluded from this facet.
std::vector<std::string> buckets_for(const EvalRecord& rec, const QuestionItem& item,
                                     const FacetInputs& in, const std::string& facet) {
    if (facet == "code") return {item.code};
    const taxonomy::QuestionCode code = taxonomy::parse_code(item.code);
    if (facet == "category") return {taxonomy::code_category(code).name};
    if (facet == "level") return {"L" + std::to_string(code.level)};
    if (facet == "entity") {
        std::vector<std::string> out;
        out.push_back(code.ans_mix ? "MIX" : to_string(*code.ans_entity));
        if (in.entity_per_involved_kind && code.ref_entity &&
            to_string(*code.ref_entity) != out.front())
            out.push_back(to_string(*code.ref_entity));
        return out;
    }
    if (facet == "n_videos") return {std::to_string(item.video_ids.size())};
    if (facet == "condition") return {rec.condition};
    if (facet == "distractor_subtype") {
        if (item.variant.empty()) return {};  // EXIST items only
        return {item.variant};
    }
    if (facet == "game" || facet == "video_length_bucket") {
        if (!in.videos)
            throw std::invalid_argument("facet '" + facet + "' needs video metadata");
        double longest = 0.0;
        std::string game;
        for (const auto& vid : item.video_ids) {
            auto it = in.videos->find(vid);
            if (it == in.videos->end())
                throw std::invalid_argument("no video metadata for " + vid);
            longest = std::max(longest, it->second.duration_s);
            if (game.empty()) game = it->second.game;
        }
        return facet == "game" ? std::vector<std::string>{game}
                               : std::vector<std::string>{length_bucket(longest)};
    }
    throw std::invalid_argument("unknown facet: " + facet);
}

// Fixed ordering for facets with a natural sequence, alphabetical otherwise.
std::vector<std::string> ordered_buckets(const std::string& facet,
                                         const std::map<std::string, FacetRow>& rows) {
    std::vector<std::string> preferred;
    if (facet == "video_length_bucket") preferred = kLengthBuckets;
    if (facet == "entity") preferred = kEntityOrder;
    if (facet == "distractor_subtype") preferred = kSubtypeOrder;
    if (facet == "condition") preferred = eval::kConditions;
    std::vector<std::string> out;
    std::set<std::string> placed;
    for (const auto& b : preferred)
        if (rows.count(b)) {
            out.push_back(b);
            placed.insert(b);
        }
    for (const auto& [b, row] : rows)
        if (!placed.count(b)) out.push_back(b);
    return out;
}

}  // namespace

bool is_facet(const std::string& name) {
    return std::find(kFacetNames.begin(), kFacetNames.end(), name) != kFacetNames.end();
}

ScoreSummary score_records(const std::vector<EvalRecord>& records) {
    ScoreSummary s;
    std::set<std::string> keys;
    for (const auto& r : records) {
        if (!keys.insert(r.question_id + "\x1f" + r.model_id + "\x1f" + r.condition).second)
            throw std::invalid_argument("duplicate record for question " + r.question_id);
        ++s.n;
        if (r.correct) ++s.n_correct;
        s.per_question[r.question_id] = r.correct;
    }
    s.accuracy = ratio(s.n_correct, s.n);
    return s;
}

std::vector<FacetRow> facet_accuracy(const std::vector<EvalRecord>& records,
                                     const FacetInputs& in, const std::string& facet) {
    if (!is_facet(facet)) throw std::invalid_argument("unknown facet: " + facet);
    if (!in.items) throw std::invalid_argument("facet_accuracy needs items");
    std::map<std::string, FacetRow> rows;
    for (const auto& rec : records) {
        auto it = in.items->find(rec.question_id);
        if (it == in.items->end())
            throw std::invalid_argument("record references unknown question " + rec.question_id);
        for (const auto& bucket : buckets_for(rec, it->second, in, facet)) {
            FacetRow& row = rows[bucket];
            row.bucket = bucket;
            ++row.n;
            if (rec.correct) ++row.n_correct;
        }
    }
    std::vector<FacetRow> out;
    for (const auto& bucket : ordered_buckets(facet, rows)) {
        FacetRow row = rows.at(bucket);
        row.accuracy = ratio(row.n_correct, row.n);
        out.push_back(std::move(row));
    }
    return out;
}

Report build_report(const std::vector<EvalRecord>& records, const FacetInputs& in,
                    const std::vector<std::string>& facets) {
    Report rep;
    std::set<std::string> models;
    for (const auto& r : records) models.insert(r.model_id);
    rep.model_id = models.empty() ? "(none)" : (models.size() == 1 ? *models.begin() : "multiple");
    ScoreSummary s = score_records(records);
    rep.n = s.n;
    rep.n_correct = s.n_correct;
    rep.overall = s.accuracy;
    for (const auto& facet : facets)
        rep.facets.emplace_back(facet, facet_accuracy(records, in, facet));
    return rep;
}

ReportFormat parse_format(const std::string& name) {
    if (name == "structured") return ReportFormat::Structured;
    if (name == "tabular") return ReportFormat::Tabular;
    if (name == "human" || name == "human-readable") return ReportFormat::Human;
    throw std::invalid_argument("unknown report format: " + name);
}

std::string emit_report(const Report& report, ReportFormat format) {
    if (format == ReportFormat::Structured) {
        json facets = json::object();
        for (const auto& [name, rows] : report.facets) {
            json arr = json::array();
            for (const auto& row : rows)
                arr.push_back(json{{"bucket", row.bucket},
                                   {"n", row.n},
                                   {"n_correct", row.n_correct},
                                   {"accuracy", row.accuracy}});
            facets[name] = arr;
        }
        return canonical_line(json{{"model_id", report.model_id},
                                   {"n", report.n},
                                   {"n_correct", report.n_correct},
                                   {"overall", report.overall},
                                   {"facets", facets}});
    }
    if (format == ReportFormat::Tabular) {
        std::string out;
        out += "model_id\t" + report.model_id + "\n";
        out += "overall\t" + std::to_string(report.n) + "\t" + std::to_string(report.n_correct) +
               "\t" + pct(report.overall) + "\n";
        out += "facet\tbucket\tn\tn_correct\taccuracy_pct\n";
        for (const auto& [name, rows] : report.facets)
            for (const auto& row : rows)
                out += name + "\t" + row.bucket + "\t" + std::to_string(row.n) + "\t" +
                       std::to_string(row.n_correct) + "\t" + pct(row.accuracy) + "\n";
        return out;
    }

    std::ostringstream out;
    out << "Model: " << report.model_id << "\n";
    out << "Records scored: " << report.n << "\n";
    if (report.n == 0) {
        out << "No records were scored; accuracy is undefined.\n";
        return out.str();
    }
    out << "Overall accuracy: " << pct(report.overall) << "% (" << report.n_correct << "/"
        << report.n << ")\n";
    for (const auto& [name, rows] : report.facets) {
        out << "\n[" << name << "]\n";
        size_t width = 6;
        for (const auto& row : rows) width = std::max(width, row.bucket.size());
        for (const auto& row : rows) {
            out << "  " << row.bucket << std::string(width - row.bucket.size() + 2, ' ')
                << pct(row.accuracy) << "%  (" << row.n_correct << "/" << row.n << ")\n";
        }
    }
    return out.str();
}

Report parse_tabular(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    Report rep;
    bool seen_header = false;
    auto split = [](const std::string& s) {
        std::vector<std::string> cols;
        size_t p = 0;
        while (true) {
            size_t t = s.find('\t', p);
            if (t == std::string::npos) {
                cols.push_back(s.substr(p));
                break;
            }
            cols.push_back(s.substr(p, t - p));
            p = t + 1;
        }
        return cols;
    };
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto cols = split(line);
        if (cols[0] == "model_id" && cols.size() == 2) {
            rep.model_id = cols[1];
        } else if (cols[0] == "overall" && cols.size() == 4) {
            rep.n = std::stoll(cols[1]);
            rep.n_correct = std::stoll(cols[2]);
            rep.overall = ratio(rep.n_correct, rep.n);
        } else if (cols[0] == "facet") {
            seen_header = true;
        } else if (seen_header && cols.size() == 5) {
            FacetRow row;
            row.bucket = cols[1];
            row.n = std::stoll(cols[2]);
            row.n_correct = std::stoll(cols[3]);
            row.accuracy = ratio(row.n_correct, row.n);
            if (rep.facets.empty() || rep.facets.back().first != cols[0])
                rep.facets.emplace_back(cols[0], std::vector<FacetRow>{});
            rep.facets.back().second.push_back(std::move(row));
        } else {
            throw std::invalid_argument("unparseable tabular report line: " + line);
        }
    }
    return rep;
}

bool reports_equal(const Report& a, const Report& b) {
    return a.model_id == b.model_id && a.n == b.n && a.n_correct == b.n_correct &&
           a.overall == b.overall && a.facets == b.facets;
}

}  // namespace povqa::report
