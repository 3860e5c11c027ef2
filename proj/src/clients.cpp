#include "povqa/clients.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <fstream>
#include <sstream>
#include <thread>

#include "httplib.h"
#include "povqa/rng.hpp"

namespace povqa::client {

namespace {

// Number of options in a rendered prompt, by counting "A. ", "B. ", ... at
// line starts.
size_t count_options(const std::string& rendered) {
    size_t n = 0;
    for (char letter = 'A'; letter <= 'Z'; ++letter) {
        std::string needle = "\n";
        needle += letter;
        needle += ". ";
        if (rendered.find(needle) == std::string::npos) break;
        ++n;
    }
    return n;
}

// 64-bit avalanche finalizer.  The raw FNV low bits are linear in the input
// byte parities, which would let prompts sharing a question block pick
// correlated letters; the finalizer decorrelates them.
uint64_t mix64(uint64_t h) {
    h ^= h >> 33;
    h *= 0xff51afd7ed558ccdull;
    h ^= h >> 33;
    h *= 0xc4ceb9fe1a85ec53ull;
    h ^= h >> 33;
    return h;
}

std::string hash_letter(const std::string& rendered, size_t n_options, uint64_t salt = 0) {
    if (n_options == 0) n_options = 4;
    uint64_t h = mix64(fnv1a64(rendered) ^ salt);
    return std::string(1, static_cast<char>('A' + h % n_options));
}

// Substring between two markers, or empty.
std::string between(const std::string& text, const std::string& lo, const std::string& hi) {
    size_t a = text.find(lo);
    if (a == std::string::npos) return "";
    a += lo.size();
    size_t b = text.find(hi, a);
    if (b == std::string::npos) return "";
    return text.substr(a, b - a);
}

std::string lowercase(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

std::string trim(const std::string& s) {
    const std::string junk = " \t\r\n.,:;!?()[]{}*'\"";
    size_t a = s.find_first_not_of(junk);
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(junk);
    return s.substr(a, b - a + 1);
}

// The question block inside any of our prompt layouts: from "Q: " up to the
// trailing instruction.
std::string find_question_block(const std::string& rendered) {
    size_t q = rendered.rfind("\nQ: ");
    if (q != std::string::npos)
        q += 1;
    else if (rendered.rfind("Q: ", 0) == 0)
        q = 0;
    else
        return "";
    for (const char* stop : {"\n\nPlease select", "\n\nYour answer:", "\n\nAvailable options"}) {
        size_t e = rendered.find(stop, q);
        if (e != std::string::npos) return rendered.substr(q, e - q);
    }
    return rendered.substr(q);
}

// Rule-table judge used in tests: ordinals, lone letters, option-text matches.
std::string judge_by_rules(const std::string& rendered) {
    const std::string options =
        between(rendered, "Available options are: ", "\n\nThe model's response was:");
    const std::string raw =
        between(rendered, "The model's response was:\n\n", "\n\nYour task is to determine");
    size_t n_options = 0;
    std::vector<std::string> option_texts;
    {
        std::istringstream in(options);
        std::string line;
        while (std::getline(in, line)) {
            if (line.size() > 3 && line[0] == static_cast<char>('A' + n_options) &&
                line[1] == '.' && line[2] == ' ') {
                option_texts.push_back(line.substr(3));
                ++n_options;
            }
        }
    }
    if (n_options == 0) n_options = 4;

    const std::string t = trim(raw);
    if (t.empty()) return "X";
    if (t.size() == 1) {
        char up = static_cast<char>(std::toupper(static_cast<unsigned char>(t[0])));
        if (up >= 'A' && up < static_cast<char>('A' + n_options)) return std::string(1, up);
    }

    const std::string low = lowercase(t);
    const std::vector<std::pair<std::string, size_t>> ordinals = {
        {"first", 0}, {"second", 1}, {"third", 2}, {"fourth", 3}};
    size_t best_pos = std::string::npos;
    std::string best;
    for (const auto& [word, idx] : ordinals) {
        size_t p = low.find(word);
        if (p != std::string::npos && idx < n_options && p < best_pos) {
            best_pos = p;
            best = std::string(1, static_cast<char>('A' + idx));
        }
    }
    if (!best.empty()) return best;

    // a single standalone letter token anywhere in the response
    std::string found;
    for (size_t i = 0; i < t.size(); ++i) {
        char c = t[i];
        if (c < 'A' || c >= static_cast<char>('A' + n_options)) continue;
        bool left_ok = i == 0 || !std::isalnum(static_cast<unsigned char>(t[i - 1]));
        bool right_ok = i + 1 == t.size() || !std::isalnum(static_cast<unsigned char>(t[i + 1]));
        if (left_ok && right_ok) {
            if (!found.empty() && found != std::string(1, c)) return "X";  // ambiguous
            found = std::string(1, c);
        }
    }
    if (!found.empty()) return found;

    // response quoting one option's text verbatim
    std::string matched;
    for (size_t i = 0; i < option_texts.size(); ++i)
        if (!option_texts[i].empty() && low.find(lowercase(option_texts[i])) != std::string::npos) {
            if (!matched.empty()) return "X";
            matched = std::string(1, static_cast<char>('A' + i));
        }
    return matched.empty() ? "X" : matched;
}

}  // namespace

std::string render_prompt_text(const std::vector<Message>& messages) {
    std::string out;
    int frame_no = 0;
    std::string frame_video;
    bool prev_frame = false;
    for (const auto& msg : messages)
        for (const auto& part : msg.parts) {
            if (part.type == Part::Type::Text) {
                out += part.text;
                prev_frame = false;
                frame_no = 0;
                frame_video.clear();
            } else {
                if (!prev_frame || part.video_id != frame_video) {
                    frame_no = 0;
                    frame_video = part.video_id;
                }
                if (prev_frame) out += ' ';
                out += "<frame_" + std::to_string(++frame_no) + ">";
                prev_frame = true;
            }
        }
    return out;
}

MockClient::MockClient(const std::string& behavior) : behavior_(behavior) {
    auto starts = [&](const char* p) { return behavior.rfind(p, 0) == 0; };
    if (starts("fixed:")) {
        kind_ = "fixed";
        fixed_text_ = behavior.substr(6);
    } else if (behavior == "hash" || behavior == "echo" || behavior == "judge") {
        kind_ = behavior;
    } else if (starts("script:")) {
        kind_ = "script";
        std::ifstream in(behavior.substr(7));
        if (!in) throw std::invalid_argument("mock script not readable: " + behavior.substr(7));
        json doc = json::parse(in);
        for (const auto& [k, v] : doc.items()) script_[k] = v.get<std::string>();
    } else if (starts("plant:") || starts("ordered:")) {
        kind_ = starts("plant:") ? "plant" : "ordered";
        std::string rest = behavior.substr(behavior.find(':') + 1);
        size_t n_correct = std::string::npos;
        std::string path = rest;
        if (kind_ == "plant") {
            size_t colon = rest.rfind(':');
            if (colon == std::string::npos)
                throw std::invalid_argument("plant mock needs <items-path>:<n-correct>");
            path = rest.substr(0, colon);
            n_correct = static_cast<size_t>(std::stoull(rest.substr(colon + 1)));
        }
        std::ifstream in(path);
        if (!in) throw std::invalid_argument("mock items not readable: " + path);
        // sorted item ids decide which questions the plant answers correctly
        std::vector<std::pair<std::string, json>> docs;
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            json doc = json::parse(line);
            if (doc.contains("_manifest")) continue;
            docs.emplace_back(doc.at("id").get<std::string>(), std::move(doc));
        }
        std::sort(docs.begin(), docs.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        for (size_t i = 0; i < docs.size(); ++i) {
            const json& doc = docs[i].second;
            std::string block = "Q: " + doc.at("stem").get<std::string>() + "\n\n";
            const auto& options = doc.at("options");
            for (size_t j = 0; j < options.size(); ++j) {
                if (j) block += '\n';
                block += static_cast<char>('A' + j);
                block += ". " + options[j].at("text").get<std::string>();
            }
            const std::string key = hex64(fnv1a64(block));
            const int answer = doc.at("answer_index").get<int>();
            const std::string right(1, static_cast<char>('A' + answer));
            correct_letters_[key] = right;
            if (kind_ == "plant")
                planted_[key] = i < n_correct
                                    ? right
                                    : std::string(1, static_cast<char>(
                                                        'A' + (answer + 1) % options.size()));
        }
    } else {
        throw std::invalid_argument("unknown mock behavior: " + behavior);
    }
}

std::string MockClient::reply(const std::vector<Message>& messages, int trial) const {
    const std::string rendered = render_prompt_text(messages);
    if (kind_ == "fixed") return fixed_text_;
    if (kind_ == "hash") return hash_letter(rendered, count_options(rendered));
    if (kind_ == "echo") {
        size_t p = rendered.rfind("\n\n");
        return p == std::string::npos ? rendered : rendered.substr(p + 2);
    }
    if (kind_ == "judge") return judge_by_rules(rendered);

    const std::string block = find_question_block(rendered);
    const std::string key = hex64(fnv1a64(block));
    if (kind_ == "script") {
        auto it = script_.find(key + "#" + std::to_string(trial));
        if (it == script_.end()) it = script_.find(key);
        if (it == script_.end()) it = script_.find("default");
        return it == script_.end() ? "X" : it->second;
    }
    if (kind_ == "plant") {
        auto it = planted_.find(key);
        return it == planted_.end() ? "X" : it->second;
    }
    // ordered: reward chronologically presented frames, guess without frames
    auto it = correct_letters_.find(key);
    if (it == correct_letters_.end()) return "X";
    bool any_frame = false;
    bool ordered = true;
    std::map<std::string, double> last_t;
    for (const auto& m : messages)
        for (const auto& part : m.parts) {
            if (part.type != Part::Type::Frame) continue;
            any_frame = true;
            auto [pos, fresh] = last_t.try_emplace(part.video_id, part.t_s);
            if (!fresh) {
                if (part.t_s < pos->second) ordered = false;
                pos->second = part.t_s;
            }
        }
    if (!any_frame) return hash_letter(rendered, count_options(rendered), 0x9e3779b9u);
    if (ordered) return it->second;
    return hash_letter(rendered, count_options(rendered), 0x85ebca6bu);
}

std::string MockClient::complete(const std::vector<Message>& messages) {
    return reply(messages, 0);
}

std::string MockClient::complete_trial(const std::vector<Message>& messages, int trial) {
    return reply(messages, trial);
}

HttpChatClient::HttpChatClient(std::string endpoint, std::string model, std::string api_key,
                               int max_attempts)
    : endpoint_(std::move(endpoint)),
      model_(std::move(model)),
      api_key_(std::move(api_key)),
      max_attempts_(max_attempts < 1 ? 1 : max_attempts) {}

std::string HttpChatClient::complete(const std::vector<Message>& messages) {
    json body{{"model", model_}, {"messages", json::array()}};
    for (const auto& m : messages)
        body["messages"].push_back(
            json{{"role", m.role}, {"content", render_prompt_text({m})}});
    const std::string payload = body.dump();

    std::string last_error;
    for (int attempt = 0; attempt < max_attempts_; ++attempt) {
        if (attempt > 0)
            std::this_thread::sleep_for(std::chrono::milliseconds(200 * attempt));
        httplib::Result res;
        {
            std::lock_guard<std::mutex> lock(mu_);
            httplib::Client cli(endpoint_);
            cli.set_connection_timeout(10);
            cli.set_read_timeout(120);
            httplib::Headers headers;
            if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);
            res = cli.Post("/v1/chat/completions", headers, payload, "application/json");
        }
        if (!res) {
            last_error = "transport: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status >= 500) {
            last_error = "server status " + std::to_string(res->status);
            continue;
        }
        if (res->status != 200)
            throw std::runtime_error("model endpoint returned status " +
                                     std::to_string(res->status) + ": " + res->body);
        json doc = json::parse(res->body);
        return doc.at("choices").at(0).at("message").at("content").get<std::string>();
    }
    throw TransportError(last_error.empty() ? "request failed" : last_error);
}

std::unique_ptr<ModelClient> make_client(const std::string& spec, const std::string& endpoint,
                                         const std::string& api_key) {
    if (spec.rfind("mock:", 0) == 0) return std::make_unique<MockClient>(spec.substr(5));
    if (spec.rfind("http:", 0) == 0) {
        if (endpoint.empty())
            throw std::invalid_argument("http client needs --endpoint");
        return std::make_unique<HttpChatClient>(endpoint, spec.substr(5), api_key);
    }
    throw std::invalid_argument("client spec must start with mock: or http:, got: " + spec);
}

}  // namespace povqa::client
