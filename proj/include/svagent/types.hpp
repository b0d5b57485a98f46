#pragma once

#include <algorithm>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

namespace svagent {

/// Base class for all errors raised by the svagent core.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class ManifestError : public Error {
public:
  using Error::Error;
};

class ConfigError : public Error {
public:
  using Error::Error;
};

class DppError : public Error {
public:
  using Error::Error;
};

/// Transport- or fixture-level failure from a model backend.
class ClientError : public Error {
public:
  using Error::Error;
};

class AgentError : public Error {
public:
  using Error::Error;
};

class StorylineError : public AgentError {
public:
  using AgentError::AgentError;
};

class HypothesisError : public AgentError {
public:
  using AgentError::AgentError;
};

class TextDecisionError : public AgentError {
public:
  using AgentError::AgentError;
};

class VisionDecisionError : public AgentError {
public:
  using AgentError::AgentError;
};

class MetaError : public AgentError {
public:
  using AgentError::AgentError;
};

class OrchestrationError : public Error {
public:
  using Error::Error;
};

class TraceError : public Error {
public:
  using Error::Error;
};

/// Sorted set of frame indices. The meaning of an index depends on context:
/// frame indices when tied to a FrameStore, kernel row positions when used
/// standalone by the DPP routines.
class FrameIndexSet {
public:
  FrameIndexSet() = default;

  explicit FrameIndexSet(std::vector<int> indices) : indices_(std::move(indices)) {
    std::sort(indices_.begin(), indices_.end());
    indices_.erase(std::unique(indices_.begin(), indices_.end()), indices_.end());
  }

  FrameIndexSet(std::initializer_list<int> indices)
      : FrameIndexSet(std::vector<int>(indices)) {}

  bool contains(int idx) const {
    return std::binary_search(indices_.begin(), indices_.end(), idx);
  }

  void insert(int idx) {
    auto it = std::lower_bound(indices_.begin(), indices_.end(), idx);
    if (it == indices_.end() || *it != idx) indices_.insert(it, idx);
  }

  std::size_t size() const { return indices_.size(); }
  bool empty() const { return indices_.empty(); }
  const std::vector<int>& values() const { return indices_; }

  auto begin() const { return indices_.begin(); }
  auto end() const { return indices_.end(); }

  bool operator==(const FrameIndexSet& other) const = default;

  std::string to_string() const {
    std::string out = "{";
    for (std::size_t i = 0; i < indices_.size(); ++i) {
      if (i) out += ", ";
      out += std::to_string(indices_[i]);
    }
    out += "}";
    return out;
  }

private:
  std::vector<int> indices_;
};

inline FrameIndexSet set_union(const FrameIndexSet& a, const FrameIndexSet& b) {
  std::vector<int> out;
  out.reserve(a.size() + b.size());
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return FrameIndexSet(std::move(out));
}

inline FrameIndexSet set_intersection(const FrameIndexSet& a, const FrameIndexSet& b) {
  std::vector<int> out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return FrameIndexSet(std::move(out));
}

inline FrameIndexSet set_difference(const FrameIndexSet& a, const FrameIndexSet& b) {
  std::vector<int> out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return FrameIndexSet(std::move(out));
}

}  // namespace svagent
