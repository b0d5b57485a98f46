#include "svagent/model_client.hpp"

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>
#include <nlohmann/json.hpp>

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <random>
#include <thread>

namespace svagent {

namespace {

using nlohmann::json;

long approx_tokens(std::size_t chars) { return static_cast<long>((chars + 3) / 4); }

std::uint64_t fnv1a64(const std::string& text) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace

void ChatRequest::validate() const {
  bool has_user = false;
  for (const auto& m : messages) {
    if (m.role == Role::user) has_user = true;
    if (m.role == Role::system && !m.image_refs.empty())
      throw ClientError("chat request: image_refs are only allowed on user messages");
  }
  if (!has_user) throw ClientError("chat request: at least one user message required");
}

// ---------------------------------------------------------------------------
// Mock backend

MockModelClient::MockModelClient(const std::string& fixtures_path, int embed_dim)
    : embed_dim_(embed_dim) {
  std::ifstream in(fixtures_path);
  if (!in) throw ClientError("cannot open fixtures file: " + fixtures_path);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw ClientError("fixtures " + fixtures_path + " line " + std::to_string(line_no) + ": " +
                        e.what());
    }
    if (j.contains("embed_text")) {
      pinned_[j.at("embed_text").get<std::string>()] =
          j.at("embedding").get<std::vector<double>>();
    } else {
      scripts_[j.at("agent_tag").get<std::string>()].push_back(
          j.at("response_text").get<std::string>());
    }
  }
}

MockModelClient::MockModelClient(std::vector<MockScriptEntry> entries, int embed_dim,
                                 std::map<std::string, std::vector<double>> pinned_embeddings)
    : pinned_(std::move(pinned_embeddings)), embed_dim_(embed_dim) {
  for (auto& e : entries) scripts_[e.agent_tag].push_back(std::move(e.response_text));
}

ChatResponse MockModelClient::chat_complete(const ChatRequest& req) {
  req.validate();
  std::lock_guard<std::mutex> lock(mu_);

  auto script = scripts_.find(req.agent_tag);
  if (script == scripts_.end())
    throw ClientError("mock fixture exhausted: no script for agent tag \"" + req.agent_tag +
                      "\"");
  const std::string cursor_key = req.run_id + "\n" + req.agent_tag;
  std::size_t& cursor = cursors_[cursor_key];
  if (cursor >= script->second.size())
    throw ClientError("mock fixture exhausted for agent tag \"" + req.agent_tag + "\" (run " +
                      req.run_id + ", " + std::to_string(cursor) + " responses consumed)");

  ChatResponse resp;
  resp.text = script->second[cursor++];
  std::size_t prompt_chars = 0;
  for (const auto& m : req.messages) prompt_chars += m.text.size();
  resp.usage.prompt_tokens = approx_tokens(prompt_chars);
  resp.usage.completion_tokens = approx_tokens(resp.text.size());
  resp.latency_ms = 0.0;
  return resp;
}

Eigen::VectorXd MockModelClient::hash_embedding(const std::string& text, int dim) {
  std::mt19937_64 rng(fnv1a64(text));
  Eigen::VectorXd v(dim);
  // Box-Muller over raw engine output; std::normal_distribution is not
  // pinned by the standard and would break byte-stable replay.
  int i = 0;
  while (i < dim) {
    const double u1 =
        (static_cast<double>(rng() >> 11) + 0.5) * (1.0 / 9007199254740992.0);  // (0,1)
    const double u2 = static_cast<double>(rng() >> 11) * (1.0 / 9007199254740992.0);
    constexpr double two_pi = 6.283185307179586476925286766559;
    const double radius = std::sqrt(-2.0 * std::log(u1));
    v[i++] = radius * std::cos(two_pi * u2);
    if (i < dim) v[i++] = radius * std::sin(two_pi * u2);
  }
  return v / v.norm();
}

Eigen::VectorXd MockModelClient::embed_text(const std::string& text) {
  if (text.empty()) throw ClientError("embed_text: empty text");
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = pinned_.find(text);
    if (it != pinned_.end()) {
      Eigen::VectorXd v(static_cast<Eigen::Index>(it->second.size()));
      for (std::size_t i = 0; i < it->second.size(); ++i)
        v[static_cast<Eigen::Index>(i)] = it->second[i];
      const double norm = v.norm();
      if (!(norm > 0.0)) throw ClientError("pinned embedding for \"" + text + "\" has zero norm");
      return v / norm;
    }
  }
  return hash_embedding(text, embed_dim_);
}

// ---------------------------------------------------------------------------
// HTTP backend

HttpModelClient::HttpModelClient(HttpClientConfig config) : config_(std::move(config)) {
  if (config_.api_key.empty()) {
    if (const char* env = std::getenv("SVAGENT_API_KEY")) config_.api_key = env;
  }
  if (config_.retry.max_attempts < 1)
    throw ConfigError("retry policy: max_attempts must be >= 1");
}

std::string HttpModelClient::post_with_retry(const std::string& base_url, const std::string& path,
                                             const std::string& body) {
  if (base_url.empty()) throw ConfigError("http client: base url not configured");

  httplib::Headers headers;
  if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);

  std::string last_error;
  for (int attempt = 1; attempt <= config_.retry.max_attempts; ++attempt) {
    if (attempt > 1) {
      const int delay = config_.retry.backoff_base_ms * (1 << (attempt - 2));
      std::this_thread::sleep_for(std::chrono::milliseconds(delay));
    }

    httplib::Client cli(base_url);
    cli.set_connection_timeout(config_.timeout_s, 0);
    cli.set_read_timeout(config_.timeout_s, 0);

    auto res = cli.Post(path, headers, body, "application/json");
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      continue;  // retryable
    }
    if (res->status == 200) return res->body;
    if (res->status == 429 || res->status >= 500) {
      last_error = "http " + std::to_string(res->status) + ": " + res->body;
      continue;  // retryable
    }
    throw ClientError("http " + std::to_string(res->status) + " from " + base_url + path + ": " +
                      res->body);
  }
  throw ClientError("retries exhausted after " + std::to_string(config_.retry.max_attempts) +
                    " attempts to " + base_url + path + " (" + last_error + ")");
}

ChatResponse HttpModelClient::chat_complete(const ChatRequest& req) {
  req.validate();

  json messages = json::array();
  for (const auto& m : req.messages) {
    json content = json::array();
    content.push_back({{"type", "text"}, {"text", m.text}});
    for (const auto& ref : m.image_refs)
      content.push_back({{"type", "image_url"}, {"image_url", {{"url", ref}}}});
    messages.push_back({{"role", m.role == Role::system ? "system" : "user"},
                        {"content", std::move(content)}});
  }
  json payload = {{"model", req.model_name},
                  {"messages", std::move(messages)},
                  {"temperature", req.temperature},
                  {"max_tokens", req.max_tokens}};

  const auto start = std::chrono::steady_clock::now();
  const std::string body =
      post_with_retry(config_.chat_base_url, "/v1/chat/completions", payload.dump());
  const auto elapsed = std::chrono::steady_clock::now() - start;

  json doc;
  try {
    doc = json::parse(body);
  } catch (const json::exception& e) {
    throw ClientError(std::string("chat response is not JSON: ") + e.what());
  }

  ChatResponse resp;
  try {
    const json& message = doc.at("choices").at(0).at("message");
    if (message.at("content").is_string()) {
      resp.text = message.at("content").get<std::string>();
    } else {
      // Some servers return content as a typed part list.
      for (const auto& part : message.at("content"))
        if (part.value("type", "") == "text") resp.text += part.at("text").get<std::string>();
    }
  } catch (const json::exception& e) {
    throw ClientError(std::string("unexpected chat response shape: ") + e.what());
  }
  if (doc.contains("usage")) {
    resp.usage.prompt_tokens = doc["usage"].value("prompt_tokens", 0L);
    resp.usage.completion_tokens = doc["usage"].value("completion_tokens", 0L);
  }
  resp.latency_ms =
      std::chrono::duration_cast<std::chrono::duration<double, std::milli>>(elapsed).count();
  return resp;
}

Eigen::VectorXd HttpModelClient::embed_text(const std::string& text) {
  if (text.empty()) throw ClientError("embed_text: empty text");

  json payload = {{"model", config_.embed_model}, {"input", text}};
  const std::string body =
      post_with_retry(config_.embed_base_url, "/v1/embeddings", payload.dump());

  json doc;
  try {
    doc = json::parse(body);
  } catch (const json::exception& e) {
    throw ClientError(std::string("embedding response is not JSON: ") + e.what());
  }

  std::vector<double> values;
  try {
    values = doc.at("data").at(0).at("embedding").get<std::vector<double>>();
  } catch (const json::exception& e) {
    throw ClientError(std::string("unexpected embedding response shape: ") + e.what());
  }
  if (values.empty()) throw ClientError("embedding response is empty");

  Eigen::VectorXd v(static_cast<Eigen::Index>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) v[static_cast<Eigen::Index>(i)] = values[i];
  const double norm = v.norm();
  if (!(norm > 0.0)) throw ClientError("embedding response has zero norm");
  return v / norm;
}

}  // namespace svagent
