#include "povqa/curation.hpp"

#include <algorithm>
#include <map>
#include <regex>
#include <set>
#include <stdexcept>

#include "povqa/eval.hpp"
#include "povqa/rng.hpp"

namespace povqa::curation {

void CurationConfig::validate() const {
    if (filter_k < 1) throw std::invalid_argument("filter_k must be >= 1");
    if (!(1 <= review_threshold && review_threshold <= remove_threshold &&
          remove_threshold <= filter_k))
        throw std::invalid_argument(
            "thresholds must satisfy 1 <= review_threshold <= remove_threshold <= filter_k");
}

int FilterVerdict::n_correct() const {
    int n = 0;
    for (const auto& t : trials)
        if (t.correct) ++n;
    return n;
}

json verdict_to_json(const FilterVerdict& v) {
    json trials = json::array();
    for (const auto& t : v.trials)
        trials.push_back(json{{"extracted", t.extracted}, {"correct", t.correct}});
    return json{{"question_id", v.question_id},
                {"trials", trials},
                {"n_correct", v.n_correct()},
                {"disposition", v.disposition},
                {"chance", v.chance}};
}

FilterVerdict verdict_from_json(const json& doc) {
    FilterVerdict v;
    v.question_id = doc.at("question_id").get<std::string>();
    for (const auto& t : doc.at("trials"))
        v.trials.push_back({t.at("extracted").get<std::string>(), t.at("correct").get<bool>()});
    v.disposition = doc.at("disposition").get<std::string>();
    if (doc.contains("chance")) v.chance = doc["chance"].get<double>();
    return v;
}

std::vector<QuestionItem> stratified_downsample(const std::vector<QuestionItem>& items,
                                                int64_t target_n, uint64_t seed) {
    if (target_n < 1) throw std::invalid_argument("target_n must be >= 1");
    if (target_n >= static_cast<int64_t>(items.size())) return items;

    // seeded shuffle per code; the first `kept` entries of each are selected
    std::map<std::string, std::vector<const QuestionItem*>> by_code;
    for (const auto& item : items) by_code[item.code].push_back(&item);
    for (auto& [code, pool] : by_code) {
        SplitRng rng(seed, "curate/downsample/" + code);
        rng.shuffle(pool);
    }

    const int64_t quota = target_n / static_cast<int64_t>(by_code.size());
    std::map<std::string, int64_t> kept;
    int64_t total = 0;
    for (const auto& [code, pool] : by_code) {
        kept[code] = std::min<int64_t>(quota, static_cast<int64_t>(pool.size()));
        total += kept[code];
    }
    int64_t remainder = target_n - total;
    while (remainder > 0) {
        // codes that still have items, smallest current count first
        std::vector<std::string> order;
        for (const auto& [code, pool] : by_code)
            if (kept[code] < static_cast<int64_t>(pool.size())) order.push_back(code);
        if (order.empty()) break;
        std::sort(order.begin(), order.end(), [&](const std::string& a, const std::string& b) {
            if (kept[a] != kept[b]) return kept[a] < kept[b];
            return a < b;
        });
        for (const auto& code : order) {
            if (remainder == 0) break;
            if (kept[code] < static_cast<int64_t>(by_code[code].size())) {
                ++kept[code];
                --remainder;
            }
        }
    }

    std::vector<QuestionItem> out;
    for (const auto& [code, pool] : by_code)
        for (int64_t i = 0; i < kept[code]; ++i) out.push_back(*pool[static_cast<size_t>(i)]);
    std::sort(out.begin(), out.end(),
              [](const QuestionItem& a, const QuestionItem& b) { return a.id < b.id; });
    return out;
}

std::vector<FilterVerdict> blind_filter(const std::vector<QuestionItem>& items,
                                        ModelClient& client, const CurationConfig& cfg) {
    cfg.validate();
    std::vector<FilterVerdict> verdicts;
    verdicts.reserve(items.size());
    for (const auto& item : items) {
        const auto msgs = eval::build_blind_prompt(item);
        const std::string answer = eval::option_letter(static_cast<size_t>(item.answer_index));
        FilterVerdict v;
        v.question_id = item.id;
        v.chance = item.options.empty() ? 0.0 : 1.0 / static_cast<double>(item.options.size());
        for (int t = 0; t < cfg.filter_k; ++t) {
            std::string raw;
            try {
                raw = client.complete_trial(msgs, t);
            } catch (const std::exception&) {
                raw.clear();  // failed trial counts as a non-answer
            }
            auto letter = eval::fast_letter(raw, item.options.size());
            FilterTrial trial;
            trial.extracted = letter ? *letter : "X";
            trial.correct = trial.extracted == answer;
            v.trials.push_back(std::move(trial));
        }
        const int correct = v.n_correct();
        if (correct >= cfg.remove_threshold)
            v.disposition = "remove";
        else if (correct >= cfg.review_threshold)
            v.disposition = "review";
        else
            v.disposition = "keep";
        verdicts.push_back(std::move(v));
    }
    return verdicts;
}

std::vector<QuestionItem> apply_filter(const std::vector<QuestionItem>& items,
                                       const std::vector<FilterVerdict>& verdicts,
                                       bool drop_review) {
    std::map<std::string, const std::string*> disposition;
    for (const auto& v : verdicts) disposition[v.question_id] = &v.disposition;
    std::vector<QuestionItem> out;
    for (const auto& item : items) {
        auto it = disposition.find(item.id);
        if (it != disposition.end()) {
            if (*it->second == "remove") continue;
            if (drop_review && *it->second == "review") continue;
        }
        out.push_back(item);
    }
    return out;
}

namespace {

// Protected spans: quoted phrases and timestamp tokens must survive a rewrite.
std::vector<std::string> protected_spans(const std::string& stem) {
    std::vector<std::string> spans;
    size_t p = 0;
    while (true) {
        size_t a = stem.find('"', p);
        if (a == std::string::npos) break;
        size_t b = stem.find('"', a + 1);
        if (b == std::string::npos) break;
        if (b > a + 1) spans.push_back(stem.substr(a + 1, b - a - 1));
        p = b + 1;
    }
    static const std::regex ts(R"(\[\d{2}:\d{2} to \d{2}:\d{2}\])");
    for (auto it = std::sregex_iterator(stem.begin(), stem.end(), ts);
         it != std::sregex_iterator(); ++it)
        spans.push_back(it->str());
    return spans;
}

}  // namespace

ParaphraseOutcome paraphrase(const std::vector<QuestionItem>& items, ModelClient& client,
                             uint64_t seed) {
    (void)seed;  // rewrites are client-driven; seed reserved for sampling strategies
    ParaphraseOutcome out;
    out.items = items;
    for (auto& item : out.items) {
        client::Message msg;
        msg.role = "user";
        client::Part part;
        part.type = client::Part::Type::Text;
        part.text =
            "Rewrite the following multiple-choice question stem so it reads naturally. Keep "
            "every quoted phrase and every timestamp exactly as written. Reply with the "
            "rewritten stem only.\n\n" +
            item.stem;
        msg.parts.push_back(std::move(part));

        std::string rewritten;
        try {
            rewritten = client.complete({msg});
        } catch (const std::exception& e) {
            ++out.failed;
            out.warnings.push_back("paraphrase failed for " + item.id + ": " + e.what());
            continue;
        }
        if (rewritten.empty() || rewritten == item.stem) continue;
        bool intact = true;
        for (const auto& span : protected_spans(item.stem))
            if (rewritten.find(span) == std::string::npos) {
                intact = false;
                break;
            }
        if (!intact) {
            ++out.rejected;
            continue;
        }
        item.stem = rewritten;
        ++out.changed;
    }
    return out;
}

}  // namespace povqa::curation
