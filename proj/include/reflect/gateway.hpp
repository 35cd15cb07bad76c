#pragma once

#include <cstdint>
#include <deque>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace reflect {

/// Why a model call was made; every token-ledger entry carries exactly one.
enum class Purpose { generate, extract, inspect, verify, critique };

const char* purpose_name(Purpose p);
std::optional<Purpose> purpose_from_name(const std::string& name);

struct SamplingParams {
  double temperature = 0.7;
  double top_p = 0.95;
  int max_tokens = 1024;
  std::vector<std::string> stop_sequences;

  /// Throws std::invalid_argument when out of range
  /// (temperature in [0,2], top_p in (0,1], max_tokens >= 1).
  void validate() const;
};

struct ModelCall {
  std::string prompt;
  SamplingParams params;
  std::int64_t call_index = 0;
  Purpose purpose = Purpose::generate;
};

struct ModelReply {
  std::string text;
  std::int64_t prompt_tokens = 0;
  std::int64_t completion_tokens = 0;
};

/// Append-only per-run token accounting. Totals always equal the sum of
/// the entries.
class TokenLedger {
 public:
  struct Entry {
    std::int64_t call_index;
    Purpose purpose;
    std::int64_t prompt_tokens;
    std::int64_t completion_tokens;
  };

  void add(std::int64_t call_index, Purpose purpose, std::int64_t prompt_tokens,
           std::int64_t completion_tokens);

  const std::vector<Entry>& entries() const { return entries_; }
  std::int64_t total_prompt_tokens() const { return total_prompt_; }
  std::int64_t total_completion_tokens() const { return total_completion_; }
  std::int64_t total_tokens() const { return total_prompt_ + total_completion_; }

  std::size_t count_with_purpose(Purpose p) const;
  std::int64_t tokens_with_purpose(Purpose p) const;

 private:
  std::vector<Entry> entries_;
  std::int64_t total_prompt_ = 0;
  std::int64_t total_completion_ = 0;
};

struct TransportError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Raised by the scripted backend when no reply is queued for a call.
struct ScriptExhausted : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// The single seam through which every LLM invocation flows. A backend
/// must be safe to call from concurrent evaluation workers.
class Backend {
 public:
  virtual ~Backend() = default;
  virtual ModelReply complete(const ModelCall& call) = 0;
};

/// Deterministic replay backend. Replies are consumed in order; entries
/// may pin a purpose (the next matching entry is used when purpose
/// filtering is on) and may pin token counts, otherwise tokens are
/// estimated as whitespace-token counts of prompt and reply.
class ScriptedBackend : public Backend {
 public:
  struct Entry {
    std::string reply;
    std::optional<Purpose> purpose;
    std::optional<std::int64_t> prompt_tokens;
    std::optional<std::int64_t> completion_tokens;
  };

  explicit ScriptedBackend(std::vector<Entry> script, bool filter_by_purpose = false)
      : script_(script.begin(), script.end()), filter_by_purpose_(filter_by_purpose) {}

  /// Loads a JSONL script: one object per expected call,
  /// {"purpose": ..., "reply": ..., "prompt_tokens"?: n, "completion_tokens"?: n}.
  static std::shared_ptr<ScriptedBackend> from_jsonl_file(const std::string& path,
                                                          bool filter_by_purpose = false);
  static std::shared_ptr<ScriptedBackend> from_jsonl_string(const std::string& text,
                                                            bool filter_by_purpose = false);

  /// Convenience: queue plain replies with estimated token counts.
  static std::shared_ptr<ScriptedBackend> from_replies(const std::vector<std::string>& replies);

  ModelReply complete(const ModelCall& call) override;

  std::size_t remaining() const { return script_.size(); }

 private:
  std::deque<Entry> script_;
  bool filter_by_purpose_;
  std::mutex mu_;
};

/// OpenAI-compatible chat-completions client. Endpoint, model, and key
/// come from REFLECT_API_BASE, REFLECT_MODEL, REFLECT_API_KEY unless set
/// explicitly. Transport failures are retried with exponential backoff
/// (3 attempts starting at 1s) before raising TransportError.
class HttpBackend : public Backend {
 public:
  struct Options {
    std::string base_url;
    std::string model;
    std::string api_key;
    int max_transport_retries = 3;
    int initial_backoff_ms = 1000;
    int timeout_s = 120;
  };

  explicit HttpBackend(Options opts);

  /// Reads the REFLECT_* environment variables; throws ConfigError-like
  /// std::runtime_error when the base URL or model is missing.
  static std::shared_ptr<HttpBackend> from_env();

  ModelReply complete(const ModelCall& call) override;

 private:
  Options opts_;
};

/// Per-run facade owning the call counter and the token ledger. Confined
/// to one worker; the shared backend behind it may serve many gateways.
class ModelGateway {
 public:
  explicit ModelGateway(std::shared_ptr<Backend> backend)
      : backend_(std::move(backend)) {}

  /// Issues one call. Never raises on model-side refusal: an empty reply
  /// text is a valid reply. Transport/script errors propagate.
  ModelReply generate(const std::string& prompt, const SamplingParams& params,
                      Purpose purpose);

  /// Draws exactly k independent samples (no shared conversation state),
  /// ordered by call_index. Backend errors propagate; a partial batch is
  /// an error, never silently truncated.
  std::vector<ModelReply> draw_k_samples(const std::string& prompt,
                                         const SamplingParams& params, int k,
                                         Purpose purpose = Purpose::generate);

  const TokenLedger& ledger() const { return ledger_; }
  std::int64_t calls_made() const { return next_call_index_; }

 private:
  std::shared_ptr<Backend> backend_;
  TokenLedger ledger_;
  std::int64_t next_call_index_ = 0;
};

}  // namespace reflect
