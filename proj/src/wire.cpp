#include "cocotree/wire.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "cocotree/error.hpp"

namespace cocotree::wire {

using nlohmann::json;

json build_chat_request(const std::string& model_id, const ModelRequest& request,
                        const std::optional<std::string>& image_payload) {
    json body;
    body["model"] = model_id;
    body["temperature"] = 0;
    body["max_tokens"] = request.max_tokens;
    if (request.kind == ModelRequest::Kind::yes_no) {
        body["logprobs"] = true;
        body["top_logprobs"] = 20;
    }

    json message;
    message["role"] = "user";
    if (image_payload) {
        json parts = json::array();
        parts.push_back({{"type", "image_url"}, {"image_url", {{"url", *image_payload}}}});
        parts.push_back({{"type", "text"}, {"text", request.prompt}});
        message["content"] = std::move(parts);
    } else {
        message["content"] = request.prompt;
    }
    body["messages"] = json::array({std::move(message)});
    return body;
}

std::string normalize_token(std::string_view token) {
    auto is_word = [](unsigned char c) { return std::isalnum(c) != 0; };
    size_t begin = 0;
    size_t end = token.size();
    while (begin < end && !is_word(static_cast<unsigned char>(token[begin]))) ++begin;
    while (end > begin && !is_word(static_cast<unsigned char>(token[end - 1]))) --end;
    std::string out(token.substr(begin, end - begin));
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

namespace {

json parse_body(const std::string& body) {
    json parsed = json::parse(body, nullptr, false);
    if (parsed.is_discarded())
        raise(ErrorCode::protocol, "response body is not valid JSON");
    return parsed;
}

const json& first_choice(const json& parsed) {
    auto choices = parsed.find("choices");
    if (choices == parsed.end() || !choices->is_array() || choices->empty())
        raise(ErrorCode::protocol, "response has no choices");
    return (*choices)[0];
}

std::string message_content(const json& choice) {
    auto message = choice.find("message");
    if (message == choice.end() || !message->is_object())
        raise(ErrorCode::protocol, "choice has no message");
    auto content = message->find("content");
    if (content == message->end() || !content->is_string())
        raise(ErrorCode::protocol, "message content is not text");
    return content->get<std::string>();
}

std::string first_word(const std::string& text) {
    size_t begin = text.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    size_t end = text.find_first_of(" \t\r\n", begin);
    return text.substr(begin, end == std::string::npos ? std::string::npos : end - begin);
}

}  // namespace

YesNoExtraction extract_yes_no(const std::string& body) {
    json parsed = parse_body(body);
    const json& choice = first_choice(parsed);

    YesNoExtraction out;
    const json* entry = nullptr;
    auto logprobs = choice.find("logprobs");
    if (logprobs != choice.end() && logprobs->is_object()) {
        auto content = logprobs->find("content");
        if (content != logprobs->end() && content->is_array() && !content->empty())
            entry = &(*content)[0];
    }

    if (entry) {
        out.first_token = entry->value("token", "");
        std::optional<double> logit_yes;
        std::optional<double> logit_no;
        auto consider = [&](const json& alt) {
            if (!alt.contains("token") || !alt.contains("logprob")) return;
            std::string norm = normalize_token(alt["token"].get<std::string>());
            double lp = alt["logprob"].get<double>();
            if (norm == "yes" && (!logit_yes || lp > *logit_yes)) logit_yes = lp;
            if (norm == "no" && (!logit_no || lp > *logit_no)) logit_no = lp;
        };
        consider(*entry);
        auto top = entry->find("top_logprobs");
        if (top != entry->end() && top->is_array())
            for (const json& alt : *top) consider(alt);

        if (logit_yes && logit_no) {
            out.logits = YesNoLogits{*logit_yes, *logit_no};
            return out;
        }
    } else {
        out.first_token = first_word(message_content(choice));
    }

    std::string norm = normalize_token(out.first_token);
    if (norm == "yes")
        out.fallback_yes = true;
    else if (norm == "no")
        out.fallback_yes = false;
    else
        raise(ErrorCode::protocol,
              "first generated token is neither yes nor no: '" + out.first_token + "'");
    return out;
}

std::string extract_completion(const std::string& body) {
    json parsed = parse_body(body);
    return message_content(first_choice(parsed));
}

std::string make_completion_body(const std::string& text) {
    json body;
    body["id"] = "synthetic";
    body["object"] = "chat.completion";
    body["model"] = "simulated";
    body["choices"] = json::array({json{{"index", 0},
                                        {"finish_reason", "stop"},
                                        {"message", {{"role", "assistant"}, {"content", text}}}}});
    return body.dump();
}

std::string make_yes_no_body(double logit_yes, double logit_no) {
    // Log-softmax so emitted logprobs are nonpositive like live ones. The
    // two-way softmax downstream is shift-invariant, so this is cosmetic.
    double peak = std::max(logit_yes, logit_no);
    double log_sum = peak + std::log(std::exp(logit_yes - peak) + std::exp(logit_no - peak));
    double lp_yes = logit_yes - log_sum;
    double lp_no = logit_no - log_sum;

    const char* answer = logit_yes >= logit_no ? "Yes" : "No";
    json top = json::array({json{{"token", "Yes"}, {"logprob", lp_yes}},
                            json{{"token", "No"}, {"logprob", lp_no}}});
    json entry = {{"token", answer},
                  {"logprob", std::max(lp_yes, lp_no)},
                  {"top_logprobs", std::move(top)}};

    json body;
    body["id"] = "synthetic";
    body["object"] = "chat.completion";
    body["model"] = "simulated";
    body["choices"] =
        json::array({json{{"index", 0},
                          {"finish_reason", "stop"},
                          {"message", {{"role", "assistant"}, {"content", answer}}},
                          {"logprobs", {{"content", json::array({std::move(entry)})}}}}});
    return body.dump();
}

}  // namespace cocotree::wire
