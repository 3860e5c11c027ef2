#include "povqa/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "povqa/rng.hpp"

namespace povqa::eval {

namespace {

constexpr double kTiny = 1e-9;

std::string trim_punct(const std::string& s) {
    const std::string junk = " \t\r\n.,:;!?()[]{}*'\"";
    size_t a = s.find_first_not_of(junk);
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(junk);
    return s.substr(a, b - a + 1);
}

std::string substitute(std::string text, const std::string& token, const std::string& value) {
    size_t p = text.find(token);
    if (p != std::string::npos) text.replace(p, token.size(), value);
    return text;
}

}  // namespace

std::string multi_video_block_header(size_t n_frames, int64_t video_index) {
    return "The following are " + std::to_string(n_frames) + " frames of the Video " +
           std::to_string(video_index) + ":";
}

std::string option_letter(size_t index) {
    return std::string(1, static_cast<char>('A' + index));
}

std::string option_lines(const QuestionItem& item) {
    std::string out;
    for (size_t i = 0; i < item.options.size(); ++i) {
        if (i) out += '\n';
        out += option_letter(i) + ". " + item.options[i].text;
    }
    return out;
}

std::string question_block(const QuestionItem& item) {
    return "Q: " + item.stem + "\n\n" + option_lines(item);
}

std::string question_key(const QuestionItem& item) {
    return hex64(fnv1a64(question_block(item)));
}

std::optional<std::string> extract_question_block(const std::string& rendered) {
    size_t q = rendered.rfind("\nQ: ");
    if (q != std::string::npos)
        q += 1;
    else if (rendered.rfind("Q: ", 0) == 0)
        q = 0;
    else
        return std::nullopt;
    for (const char* stop : {"\n\nPlease select", "\n\nYour answer:"}) {
        size_t e = rendered.find(stop, q);
        if (e != std::string::npos) return rendered.substr(q, e - q);
    }
    return rendered.substr(q);
}

std::vector<double> FramePlan::presented() const {
    if (presentation.empty()) return timestamps_s;
    std::vector<double> out;
    out.reserve(presentation.size());
    for (size_t i : presentation) out.push_back(timestamps_s.at(i));
    return out;
}

FramePlan frame_plan(double duration_s, double fps, int max_frames) {
    if (duration_s <= 0.0) throw std::domain_error("frame_plan needs a positive duration");
    if (fps <= 0.0) throw std::domain_error("frame_plan needs a positive fps");
    if (max_frames < 0) throw std::domain_error("frame_plan needs a non-negative frame cap");
    FramePlan plan;
    const auto native = static_cast<int64_t>(std::floor(duration_s * fps + kTiny));
    if (native <= max_frames) {
        for (int64_t i = 0; i < native; ++i)
            plan.timestamps_s.push_back(static_cast<double>(i) / fps);
    } else {
        for (int i = 0; i < max_frames; ++i)
            plan.timestamps_s.push_back((i + 0.5) * duration_s / max_frames);
    }
    return plan;
}

FramePlan apply_ablation(const FramePlan& plan, const std::string& condition, uint64_t seed) {
    if (condition == "baseline") return plan;
    FramePlan out = plan;
    out.presentation.clear();
    if (condition == "no_video") {
        out.timestamps_s.clear();
        return out;
    }
    if (condition == "random_frame") {
        if (!plan.timestamps_s.empty()) {
            SplitRng rng(seed, "ablate/random/" + plan.video_id);
            out.timestamps_s = {plan.timestamps_s[rng.below(plan.timestamps_s.size())]};
        }
        return out;
    }
    if (condition == "shuffled_frames") {
        out.presentation.resize(plan.timestamps_s.size());
        for (size_t i = 0; i < out.presentation.size(); ++i) out.presentation[i] = i;
        SplitRng rng(seed, "ablate/shuffle/" + plan.video_id);
        rng.shuffle(out.presentation);
        return out;
    }
    throw std::invalid_argument("unknown ablation condition: " + condition);
}

namespace {

void push_text(std::vector<client::Part>& parts, std::string text) {
    client::Part p;
    p.type = client::Part::Type::Text;
    p.text = std::move(text);
    parts.push_back(std::move(p));
}

void push_frames(std::vector<client::Part>& parts, const FramePlan& plan) {
    for (double t : plan.presented()) {
        client::Part p;
        p.type = client::Part::Type::Frame;
        p.video_id = plan.video_id;
        p.t_s = t;
        p.resize_long_side_px = plan.resize_long_side_px;
        parts.push_back(std::move(p));
    }
}

}  // namespace

std::vector<Message> build_prompt(const QuestionItem& item, const std::vector<FramePlan>& plans,
                                  const std::vector<int64_t>& pov_indices) {
    if (plans.size() != item.video_ids.size() || pov_indices.size() != plans.size())
        throw std::invalid_argument("build_prompt: plans must cover item.video_ids");
    for (size_t i = 0; i < plans.size(); ++i)
        if (plans[i].video_id != item.video_ids[i])
            throw std::invalid_argument("build_prompt: plan order must match item.video_ids");

    Message msg;
    msg.role = "user";
    push_text(msg.parts, std::string(kQaHeader));
    const bool multi = plans.size() > 1;
    for (size_t i = 0; i < plans.size(); ++i) {
        if (plans[i].frame_count() == 0) continue;
        if (multi) {
            push_text(msg.parts, "\n\n" + multi_video_block_header(plans[i].frame_count(),
                                                                   pov_indices[i]) + "\n\n");
        } else {
            push_text(msg.parts, "\n\n");
        }
        push_frames(msg.parts, plans[i]);
    }
    push_text(msg.parts, "\n\n" + question_block(item) + "\n\n" + std::string(kQaFooter) +
                             "\n\n" + std::string(kYourAnswer));
    return {std::move(msg)};
}

std::vector<Message> build_blind_prompt(const QuestionItem& item) {
    Message msg;
    msg.role = "user";
    push_text(msg.parts, std::string(kBlindHeader) + "\n\n" + question_block(item) + "\n\n" +
                             std::string(kYourAnswer));
    return {std::move(msg)};
}

std::string render_judge_prompt(const std::string& stem, const std::string& options_block,
                                const std::string& raw_text) {
    std::string out(kJudgeTemplate);
    out = substitute(std::move(out), "{question}", stem);
    out = substitute(std::move(out), "{options}", options_block);
    out = substitute(std::move(out), "{model_output}", raw_text);
    return out;
}

std::optional<std::string> fast_letter(const std::string& raw, size_t n_options) {
    const std::string t = trim_punct(raw);
    if (t.size() != 1) return std::nullopt;
    char up = static_cast<char>(std::toupper(static_cast<unsigned char>(t[0])));
    if (up >= 'A' && up < static_cast<char>('A' + n_options)) return std::string(1, up);
    return std::nullopt;
}

std::string judge_extract(const std::string& stem, const std::string& options_block,
                          size_t n_options, const std::string& raw_text, ModelClient* judge) {
    if (n_options == 0) throw std::invalid_argument("judge_extract needs options");
    if (auto quick = fast_letter(raw_text, n_options)) return *quick;
    if (trim_punct(raw_text).empty() || !judge) return "X";
    Message msg;
    msg.role = "user";
    client::Part p;
    p.type = client::Part::Type::Text;
    p.text = render_judge_prompt(stem, options_block, raw_text);
    msg.parts.push_back(std::move(p));
    std::string verdict;
    try {
        verdict = judge->complete({msg});
    } catch (const std::exception&) {
        return "X";
    }
    if (auto letter = fast_letter(verdict, n_options)) return *letter;
    return "X";
}

json record_to_json(const EvalRecord& r) {
    json doc{{"question_id", r.question_id}, {"model_id", r.model_id},
             {"raw_text", r.raw_text},       {"extracted", r.extracted},
             {"correct", r.correct},         {"condition", r.condition},
             {"latency_s", r.latency_s}};
    if (!r.error.empty()) doc["error"] = r.error;
    return doc;
}

EvalRecord record_from_json(const json& doc) {
    EvalRecord r;
    r.question_id = doc.at("question_id").get<std::string>();
    r.model_id = doc.at("model_id").get<std::string>();
    r.raw_text = doc.at("raw_text").get<std::string>();
    r.extracted = doc.at("extracted").get<std::string>();
    r.correct = doc.at("correct").get<bool>();
    r.condition = doc.at("condition").get<std::string>();
    r.latency_s = doc.at("latency_s").get<double>();
    if (doc.contains("error")) r.error = doc["error"].get<std::string>();
    return r;
}

std::vector<EvalRecord> run_eval(const std::vector<QuestionItem>& items,
                                 const std::map<std::string, VideoMeta>& videos,
                                 ModelClient& model, ModelClient* judge,
                                 const EvalRunConfig& cfg) {
    if (std::find(kConditions.begin(), kConditions.end(), cfg.condition) == kConditions.end())
        throw std::invalid_argument("unknown condition: " + cfg.condition);
    for (const auto& item : items)
        for (const auto& vid : item.video_ids)
            if (!videos.count(vid))
                throw std::invalid_argument("no video metadata for " + vid + " (item " +
                                            item.id + ")");

    int effective_max = cfg.max_frames;
    if (auto cap = model.frame_cap()) effective_max = std::min(effective_max, *cap);

    std::vector<EvalRecord> records(items.size());
    std::atomic<size_t> next{0};
    auto worker = [&] {
        for (size_t i = next.fetch_add(1); i < items.size(); i = next.fetch_add(1)) {
            const QuestionItem& item = items[i];
            // per-model caps split evenly across the item's videos
            const size_t n_videos = item.video_ids.size();
            const int budget =
                n_videos > 1 ? effective_max / static_cast<int>(n_videos) : effective_max;
            std::vector<FramePlan> plans;
            std::vector<int64_t> povs;
            const uint64_t item_seed = cfg.seed ^ fnv1a64(item.id);
            for (const auto& vid : item.video_ids) {
                const VideoMeta& meta = videos.at(vid);
                FramePlan plan = frame_plan(meta.duration_s, cfg.fps, budget);
                plan.video_id = vid;
                plans.push_back(apply_ablation(plan, cfg.condition, item_seed));
                povs.push_back(meta.pov_index);
            }
            auto msgs = build_prompt(item, plans, povs);

            EvalRecord rec;
            rec.question_id = item.id;
            rec.model_id = model.model_id();
            rec.condition = cfg.condition;
            const auto t0 = std::chrono::steady_clock::now();
            for (int attempt = 0;; ++attempt) {
                try {
                    rec.raw_text = model.complete(msgs);
                    break;
                } catch (const client::TransportError& e) {
                    if (attempt >= 2) {
                        rec.error = e.what();
                        break;
                    }
                    std::this_thread::sleep_for(std::chrono::milliseconds(100 * (attempt + 1)));
                } catch (const std::exception& e) {
                    rec.error = e.what();
                    break;
                }
            }
            rec.latency_s =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            rec.extracted = rec.error.empty()
                                ? judge_extract(item.stem, option_lines(item),
                                                item.options.size(), rec.raw_text, judge)
                                : "X";
            rec.correct =
                rec.extracted == option_letter(static_cast<size_t>(item.answer_index));
            records[i] = std::move(rec);
        }
    };

    const int n_threads =
        std::max(1, std::min<int>(cfg.concurrency, static_cast<int>(items.size())));
    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> threads;
        threads.reserve(static_cast<size_t>(n_threads));
        for (int t = 0; t < n_threads; ++t) threads.emplace_back(worker);
        for (auto& th : threads) th.join();
    }

    std::sort(records.begin(), records.end(),
              [](const EvalRecord& a, const EvalRecord& b) { return a.question_id < b.question_id; });
    return records;
}

}  // namespace povqa::eval
