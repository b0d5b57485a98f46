#pragma once

#include <Eigen/Dense>

#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "svagent/types.hpp"

namespace svagent {

enum class Role { system, user };

struct ChatMessage {
  Role role = Role::user;
  std::string text;
  std::vector<std::string> image_refs;  // only meaningful on user messages
};

struct ChatRequest {
  std::vector<ChatMessage> messages;
  double temperature = 0.0;
  int max_tokens = 1024;
  std::string model_name;
  std::string agent_tag;  // routes mock fixtures and labels the call ledger
  std::string run_id;     // isolates fixture cursors between concurrent runs

  void validate() const;  // at least one user message; image_refs on user only
};

struct TokenUsage {
  long prompt_tokens = 0;
  long completion_tokens = 0;
};

struct ChatResponse {
  std::string text;
  TokenUsage usage;
  double latency_ms = 0.0;
};

struct RetryPolicy {
  int max_attempts = 3;
  int backoff_base_ms = 500;  // exponential: base, 2*base, 4*base, ...
};

/// Uniform interface to chat-completion and text-embedding backends. Calls
/// are independent and blocking; implementations carry no per-conversation
/// state and are shareable across concurrent runs.
class ModelClient {
public:
  virtual ~ModelClient() = default;

  virtual ChatResponse chat_complete(const ChatRequest& req) = 0;

  /// Unit-L2-norm embedding (within 1e-6) of non-empty text.
  virtual Eigen::VectorXd embed_text(const std::string& text) = 0;
};

struct MockScriptEntry {
  std::string agent_tag;
  std::string response_text;
};

/// Deterministic offline backend. Chat responses replay a fixture script in
/// order per agent_tag, with an independent cursor per run_id so concurrent
/// runs never interleave. Embeddings hash the text to a reproducible
/// pseudo-random unit direction unless the fixture pins an exact vector.
class MockModelClient : public ModelClient {
public:
  /// Fixture file: JSONL of {"agent_tag": str, "response_text": str} chat
  /// entries and optional {"embed_text": str, "embedding": [num]} pins.
  MockModelClient(const std::string& fixtures_path, int embed_dim);

  MockModelClient(std::vector<MockScriptEntry> entries, int embed_dim,
                  std::map<std::string, std::vector<double>> pinned_embeddings = {});

  ChatResponse chat_complete(const ChatRequest& req) override;
  Eigen::VectorXd embed_text(const std::string& text) override;

  int embed_dim() const { return embed_dim_; }

  /// Deterministic unit direction for arbitrary text, also used standalone by
  /// tests: FNV-1a seed -> mt19937_64 -> Box-Muller -> normalize.
  static Eigen::VectorXd hash_embedding(const std::string& text, int dim);

private:
  std::map<std::string, std::vector<std::string>> scripts_;  // agent_tag -> responses
  std::map<std::string, std::size_t> cursors_;               // run_id \n agent_tag -> next
  std::map<std::string, std::vector<double>> pinned_;
  int embed_dim_;
  std::mutex mu_;
};

struct HttpClientConfig {
  std::string chat_base_url;   // e.g. http://host:port (path /v1/chat/completions appended)
  std::string embed_base_url;  // embedding backend; may differ from chat
  std::string api_key;         // falls back to $SVAGENT_API_KEY
  std::string embed_model;
  RetryPolicy retry;
  int timeout_s = 120;
};

/// OpenAI-compatible HTTP backend. Retries transport failures, 5xx, and 429
/// with exponential backoff; other 4xx fail immediately.
class HttpModelClient : public ModelClient {
public:
  explicit HttpModelClient(HttpClientConfig config);

  ChatResponse chat_complete(const ChatRequest& req) override;
  Eigen::VectorXd embed_text(const std::string& text) override;

private:
  std::string post_with_retry(const std::string& base_url, const std::string& path,
                              const std::string& body);

  HttpClientConfig config_;
};

}  // namespace svagent
