#include "reflect/gateway.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "reflect/strings.hpp"

namespace reflect {

using nlohmann::json;

const char* purpose_name(Purpose p) {
  switch (p) {
    case Purpose::generate: return "generate";
    case Purpose::extract: return "extract";
    case Purpose::inspect: return "inspect";
    case Purpose::verify: return "verify";
    case Purpose::critique: return "critique";
  }
  return "generate";
}

std::optional<Purpose> purpose_from_name(const std::string& name) {
  if (name == "generate") return Purpose::generate;
  if (name == "extract") return Purpose::extract;
  if (name == "inspect") return Purpose::inspect;
  if (name == "verify") return Purpose::verify;
  if (name == "critique") return Purpose::critique;
  return std::nullopt;
}

void SamplingParams::validate() const {
  if (temperature < 0.0 || temperature > 2.0) {
    throw std::invalid_argument("temperature out of [0,2]");
  }
  if (top_p <= 0.0 || top_p > 1.0) {
    throw std::invalid_argument("top_p out of (0,1]");
  }
  if (max_tokens < 1) {
    throw std::invalid_argument("max_tokens must be >= 1");
  }
}

void TokenLedger::add(std::int64_t call_index, Purpose purpose,
                      std::int64_t prompt_tokens, std::int64_t completion_tokens) {
  if (prompt_tokens < 0 || completion_tokens < 0) {
    throw std::invalid_argument("negative token count");
  }
  entries_.push_back({call_index, purpose, prompt_tokens, completion_tokens});
  total_prompt_ += prompt_tokens;
  total_completion_ += completion_tokens;
}

std::size_t TokenLedger::count_with_purpose(Purpose p) const {
  std::size_t n = 0;
  for (const auto& e : entries_) {
    if (e.purpose == p) ++n;
  }
  return n;
}

std::int64_t TokenLedger::tokens_with_purpose(Purpose p) const {
  std::int64_t n = 0;
  for (const auto& e : entries_) {
    if (e.purpose == p) n += e.prompt_tokens + e.completion_tokens;
  }
  return n;
}

// ---------------------------------------------------------------------------
// ScriptedBackend

std::shared_ptr<ScriptedBackend> ScriptedBackend::from_jsonl_string(
    const std::string& text, bool filter_by_purpose) {
  std::vector<Entry> script;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::string t = strings::trim(line);
    if (t.empty()) continue;
    json j = json::parse(t);
    Entry e;
    e.reply = j.value("reply", "");
    if (j.contains("purpose") && j["purpose"].is_string()) {
      e.purpose = purpose_from_name(j["purpose"].get<std::string>());
    }
    if (j.contains("prompt_tokens")) e.prompt_tokens = j["prompt_tokens"].get<std::int64_t>();
    if (j.contains("completion_tokens")) {
      e.completion_tokens = j["completion_tokens"].get<std::int64_t>();
    }
    script.push_back(std::move(e));
  }
  return std::make_shared<ScriptedBackend>(std::move(script), filter_by_purpose);
}

std::shared_ptr<ScriptedBackend> ScriptedBackend::from_jsonl_file(
    const std::string& path, bool filter_by_purpose) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open script file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return from_jsonl_string(buf.str(), filter_by_purpose);
}

std::shared_ptr<ScriptedBackend> ScriptedBackend::from_replies(
    const std::vector<std::string>& replies) {
  std::vector<Entry> script;
  script.reserve(replies.size());
  for (const auto& r : replies) script.push_back(Entry{r, {}, {}, {}});
  return std::make_shared<ScriptedBackend>(std::move(script));
}

ModelReply ScriptedBackend::complete(const ModelCall& call) {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = script_.begin();
  if (filter_by_purpose_) {
    while (it != script_.end() && it->purpose && *it->purpose != call.purpose) ++it;
  }
  if (it == script_.end()) {
    throw ScriptExhausted("no scripted reply for call " + std::to_string(call.call_index) +
                          " (" + purpose_name(call.purpose) + ")");
  }
  Entry e = *it;
  script_.erase(it);
  ModelReply r;
  r.text = e.reply;
  r.prompt_tokens = e.prompt_tokens ? *e.prompt_tokens
                                    : static_cast<std::int64_t>(
                                          strings::count_ws_tokens(call.prompt));
  r.completion_tokens = e.completion_tokens
                            ? *e.completion_tokens
                            : static_cast<std::int64_t>(strings::count_ws_tokens(e.reply));
  return r;
}

// ---------------------------------------------------------------------------
// HttpBackend

HttpBackend::HttpBackend(Options opts) : opts_(std::move(opts)) {
  if (opts_.base_url.empty()) throw std::runtime_error("HttpBackend: base_url is required");
  if (opts_.model.empty()) throw std::runtime_error("HttpBackend: model is required");
}

std::shared_ptr<HttpBackend> HttpBackend::from_env() {
  Options o;
  const char* base = std::getenv("REFLECT_API_BASE");
  const char* model = std::getenv("REFLECT_MODEL");
  const char* key = std::getenv("REFLECT_API_KEY");
  if (base == nullptr || *base == '\0') {
    throw std::runtime_error("REFLECT_API_BASE is not set");
  }
  if (model == nullptr || *model == '\0') {
    throw std::runtime_error("REFLECT_MODEL is not set");
  }
  o.base_url = base;
  o.model = model;
  o.api_key = key ? key : "";
  return std::make_shared<HttpBackend>(std::move(o));
}

ModelReply HttpBackend::complete(const ModelCall& call) {
  call.params.validate();

  json body;
  body["model"] = opts_.model;
  body["messages"] = json::array({json{{"role", "user"}, {"content", call.prompt}}});
  body["temperature"] = call.params.temperature;
  body["top_p"] = call.params.top_p;
  body["max_tokens"] = call.params.max_tokens;
  if (!call.params.stop_sequences.empty()) body["stop"] = call.params.stop_sequences;
  const std::string payload = body.dump();

  std::string last_error;
  int backoff_ms = opts_.initial_backoff_ms;
  for (int attempt = 0; attempt <= opts_.max_transport_retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(std::chrono::milliseconds(backoff_ms));
      backoff_ms *= 2;
    }
    httplib::Client cli(opts_.base_url);
    cli.set_read_timeout(opts_.timeout_s, 0);
    cli.set_connection_timeout(10, 0);
    httplib::Headers headers;
    if (!opts_.api_key.empty()) {
      headers.emplace("Authorization", "Bearer " + opts_.api_key);
    }
    auto res = cli.Post("/v1/chat/completions", headers, payload, "application/json");
    if (!res) {
      last_error = "transport: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status == 429 || res->status >= 500) {
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200) {
      throw TransportError("backend returned HTTP " + std::to_string(res->status) + ": " +
                           res->body);
    }
    json j = json::parse(res->body, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded()) {
      last_error = "unparseable response body";
      continue;
    }
    ModelReply r;
    if (j.contains("choices") && !j["choices"].empty()) {
      const auto& msg = j["choices"][0];
      if (msg.contains("message") && msg["message"].contains("content") &&
          msg["message"]["content"].is_string()) {
        r.text = msg["message"]["content"].get<std::string>();
      }
    }
    if (j.contains("usage")) {
      r.prompt_tokens = j["usage"].value("prompt_tokens", std::int64_t{0});
      r.completion_tokens = j["usage"].value("completion_tokens", std::int64_t{0});
    } else {
      r.prompt_tokens = static_cast<std::int64_t>(strings::count_ws_tokens(call.prompt));
      r.completion_tokens = static_cast<std::int64_t>(strings::count_ws_tokens(r.text));
    }
    return r;
  }
  throw TransportError("backend unreachable after " +
                       std::to_string(opts_.max_transport_retries + 1) + " attempts: " +
                       last_error);
}

// ---------------------------------------------------------------------------
// ModelGateway

ModelReply ModelGateway::generate(const std::string& prompt, const SamplingParams& params,
                                  Purpose purpose) {
  params.validate();
  ModelCall call;
  call.prompt = prompt;
  call.params = params;
  call.call_index = next_call_index_++;
  call.purpose = purpose;
  ModelReply reply = backend_->complete(call);
  ledger_.add(call.call_index, purpose, reply.prompt_tokens, reply.completion_tokens);
  return reply;
}

std::vector<ModelReply> ModelGateway::draw_k_samples(const std::string& prompt,
                                                     const SamplingParams& params, int k,
                                                     Purpose purpose) {
  if (k < 1) throw std::invalid_argument("draw_k_samples: k must be >= 1");
  std::vector<ModelReply> replies;
  replies.reserve(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) {
    replies.push_back(generate(prompt, params, purpose));
  }
  return replies;
}

}  // namespace reflect
