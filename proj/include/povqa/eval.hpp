#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "povqa/annotation.hpp"
#include "povqa/clients.hpp"
#include "povqa/generator.hpp"

namespace povqa::eval {

using client::Message;
using client::ModelClient;
using gen::QuestionItem;

// ---------------------------------------------------------------------------
// prompt text fixtures (option rendering is "A. ...\nB. ..." throughout)

inline constexpr std::string_view kQaHeader =
    "Watch the video carefully and answer the following multiple choice question:";
inline constexpr std::string_view kQaFooter =
    "Please select the correct answer from the options. Answer with the letter directly.";
inline constexpr std::string_view kYourAnswer = "Your answer:";
inline constexpr std::string_view kBlindHeader =
    "You are answering multiple choice questions about video game footage.\n\n"
    "You have NOT seen the video. Based only on the question and options provided, select the "
    "most likely answer.\n\n"
    "You must respond with ONLY a single letter (A, B, C, or D).";
inline constexpr std::string_view kJudgeTemplate =
    "You judge which option a model selected for a multiple choice question.\n\n"
    "The question was:\n\n"
    "{question}\n\n"
    "Available options are: {options}\n\n"
    "The model's response was:\n\n"
    "{model_output}\n\n"
    "Your task is to determine which option the model selected. Look for:\n\n"
    "- Explicit mention of a letter (e.g., \"A\", \"B\", \"C\", \"D\")\n"
    "- The model stating or implying a specific choice\n"
    "- The response content matching one of the available options\n\n"
    "If the model clearly selected one of the options, return the corresponding letter.\n\n"
    "If the model's response is empty, an error, unclear, or does not make a definitive choice, "
    "return \"X\".";

// "The following are {n} frames of the Video {k}:"
std::string multi_video_block_header(size_t n_frames, int64_t video_index);

std::string option_letter(size_t index);                       // 0 -> "A"
std::string option_lines(const QuestionItem& item);            // "A. ...\nB. ..."
std::string question_block(const QuestionItem& item);          // "Q: stem\n\noptions"
std::string question_key(const QuestionItem& item);            // stable hash of the block
// The question block embedded in a rendered prompt, if any (used by mocks).
std::optional<std::string> extract_question_block(const std::string& rendered);

// ---------------------------------------------------------------------------
// frame plans

struct FramePlan {
    std::string video_id;
    std::vector<double> timestamps_s;     // ascending
    std::vector<size_t> presentation;     // permutation over timestamps; empty = identity
    int resize_long_side_px = 720;

    size_t frame_count() const { return timestamps_s.size(); }
    // timestamps in the order they are shown
    std::vector<double> presented() const;
};

// 1 FPS up to max_frames (t_i = i/fps), otherwise exactly max_frames uniform
// midpoints (i + 0.5) * duration / max_frames.  Throws std::domain_error on
// non-positive duration.
FramePlan frame_plan(double duration_s, double fps = 1.0, int max_frames = 32);

inline const std::vector<std::string> kConditions = {"baseline", "no_video", "random_frame",
                                                     "shuffled_frames"};

// baseline: unchanged; no_video: empty; random_frame: one seeded pick;
// shuffled_frames: seeded presentation permutation, timestamps untouched.
FramePlan apply_ablation(const FramePlan& plan, const std::string& condition, uint64_t seed);

// ---------------------------------------------------------------------------
// prompts

// Plans must cover item.video_ids (single plan -> single-video template,
// several -> per-video labeled blocks in the order given).  video_index for
// block labels comes from the supplied pov indices.
std::vector<Message> build_prompt(const QuestionItem& item, const std::vector<FramePlan>& plans,
                                  const std::vector<int64_t>& pov_indices);
std::vector<Message> build_blind_prompt(const QuestionItem& item);
std::string render_judge_prompt(const std::string& stem, const std::string& options_block,
                                const std::string& raw_text);

// ---------------------------------------------------------------------------
// answer extraction

// Single-letter fast path: trims whitespace/punctuation and accepts one
// letter within the option range.
std::optional<std::string> fast_letter(const std::string& raw, size_t n_options);

// Fast path first; otherwise ask the judge with the judge template and accept
// only a letter in range or "X".  No judge -> "X".
std::string judge_extract(const std::string& stem, const std::string& options_block,
                          size_t n_options, const std::string& raw_text, ModelClient* judge);

// ---------------------------------------------------------------------------
// evaluation runs

struct EvalRecord {
    std::string question_id;
    std::string model_id;
    std::string raw_text;
    std::string extracted;  // "A".."D" or "X"
    bool correct = false;
    std::string condition;
    double latency_s = 0.0;
    std::string error;  // transport failure note, empty otherwise
};

json record_to_json(const EvalRecord& r);
EvalRecord record_from_json(const json& doc);

struct EvalRunConfig {
    std::string condition = "baseline";
    int concurrency = 4;
    uint64_t seed = 0;
    double fps = 1.0;
    int max_frames = 32;
};

// One record per item, sorted by question_id; per-model frame caps are split
// evenly across an item's videos.  Transient transport errors retry with
// bounded backoff, then record "X" with an error note.
std::vector<EvalRecord> run_eval(const std::vector<QuestionItem>& items,
                                 const std::map<std::string, VideoMeta>& videos,
                                 ModelClient& model, ModelClient* judge,
                                 const EvalRunConfig& cfg);

}  // namespace povqa::eval
