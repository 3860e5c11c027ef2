#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "povqa/canonical_json.hpp"

namespace povqa::client {

// One prompt fragment: literal text, or a reference to a video frame the
// transport layer is expected to attach (the core never touches pixels).
struct Part {
    enum class Type { Text, Frame };
    Type type = Type::Text;
    std::string text;      // Text parts
    std::string video_id;  // Frame parts
    double t_s = 0.0;
    int resize_long_side_px = 720;
};

struct Message {
    std::string role;  // "user" (single-turn prompts throughout)
    std::vector<Part> parts;
};

// Flattens messages to the canonical text form: frame parts become
// "<frame_k>" tokens numbered 1.. within each contiguous same-video block.
std::string render_prompt_text(const std::vector<Message>& messages);

enum class ClientMode { TextOnly, Frames, VideoNative };

// Transient transport failure; the eval loop retries these with backoff.
struct TransportError : std::runtime_error {
    explicit TransportError(const std::string& m) : std::runtime_error(m) {}
};

class ModelClient {
public:
    virtual ~ModelClient() = default;
    virtual std::string model_id() const = 0;
    virtual ClientMode mode() const { return ClientMode::TextOnly; }
    virtual std::optional<int> frame_cap() const { return std::nullopt; }
    virtual std::string complete(const std::vector<Message>& messages) = 0;
    // Repeated-trial entry point (blind filtering); default ignores the index
    // so stateless clients answer identically across trials.
    virtual std::string complete_trial(const std::vector<Message>& messages, int trial) {
        (void)trial;
        return complete(messages);
    }
};

// Deterministic stand-ins for tests and offline runs.  Behavior strings:
//   fixed:<text>     always <text>
//   hash             uniform letter over the prompt's options, by content hash
//   echo             text after the prompt's final blank line (identity rewrites)
//   script:<path>    JSON object: question-key (optionally "#<trial>") -> reply
//   plant:<path>:<n> answers the first n item ids (sorted) correctly, rest wrong
//   ordered:<path>   correct iff every video's frames appear in increasing
//                    time order (at least one frame); otherwise hash letter
//   judge            rule-table option extraction for judge prompts
class MockClient : public ModelClient {
public:
    explicit MockClient(const std::string& behavior);

    std::string model_id() const override { return "mock:" + behavior_; }
    std::string complete(const std::vector<Message>& messages) override;
    std::string complete_trial(const std::vector<Message>& messages, int trial) override;

private:
    std::string reply(const std::vector<Message>& messages, int trial) const;

    std::string behavior_;
    std::string kind_;
    std::string fixed_text_;
    std::map<std::string, std::string> script_;            // question key -> reply
    std::map<std::string, std::string> planted_;           // question key -> letter
    std::map<std::string, std::string> correct_letters_;   // question key -> letter
};

// Minimal chat-completions transport.  Body: {model, messages:[{role,content}]},
// reply: choices[0].message.content.  Frame parts travel as inline tokens; a
// real deployment swaps this class for one that uploads pixels.
class HttpChatClient : public ModelClient {
public:
    HttpChatClient(std::string endpoint, std::string model, std::string api_key,
                   int max_attempts = 3);

    std::string model_id() const override { return model_; }
    ClientMode mode() const override { return ClientMode::Frames; }
    std::string complete(const std::vector<Message>& messages) override;

private:
    std::string endpoint_;
    std::string model_;
    std::string api_key_;
    int max_attempts_;
    std::mutex mu_;  // httplib clients are not thread-safe; serialize calls
};

// Parses a client spec: "mock:<behavior>" or "http:<model>" (endpoint + key
// required for http).  Throws std::invalid_argument on anything else.
std::unique_ptr<ModelClient> make_client(const std::string& spec, const std::string& endpoint,
                                         const std::string& api_key);

}  // namespace povqa::client
