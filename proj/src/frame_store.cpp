#include "svagent/frame_store.hpp"

#include <nlohmann/json.hpp>

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

namespace svagent {

namespace {

using nlohmann::json;

// Skip renormalization for rows already within this distance of unit norm so
// that load(save(load(x))) reproduces the stored floats exactly.
constexpr double kNormSlack = 1e-6;

void normalize_embedding(std::vector<float>& v, int frame_index) {
  double norm_sq = 0.0;
  for (float x : v) norm_sq += static_cast<double>(x) * static_cast<double>(x);
  double norm = std::sqrt(norm_sq);
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    throw ManifestError("frame " + std::to_string(frame_index) +
                        ": embedding has zero or non-finite norm");
  }
  if (std::abs(norm - 1.0) <= kNormSlack) return;
  for (float& x : v) x = static_cast<float>(static_cast<double>(x) / norm);
}

std::vector<float> parse_inline_embedding(const json& arr, int frame_index) {
  if (!arr.is_array()) {
    throw ManifestError("frame " + std::to_string(frame_index) +
                        ": \"embedding\" must be an array of numbers");
  }
  std::vector<float> out;
  out.reserve(arr.size());
  for (const auto& x : arr) {
    if (!x.is_number()) {
      throw ManifestError("frame " + std::to_string(frame_index) +
                          ": non-numeric embedding entry");
    }
    out.push_back(static_cast<float>(x.get<double>()));
  }
  return out;
}

std::vector<std::vector<float>> read_sidecar(const std::string& path, std::size_t n,
                                             std::size_t dim) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ManifestError("cannot open embeddings file: " + path);
  in.seekg(0, std::ios::end);
  const auto file_size = static_cast<std::size_t>(in.tellg());
  const std::size_t expected = n * dim * sizeof(float);
  if (file_size < expected) {
    throw ManifestError("embeddings file " + path + " too short: expected " +
                        std::to_string(expected) + " bytes for " + std::to_string(n) +
                        " frames at dimension " + std::to_string(dim) + ", found " +
                        std::to_string(file_size));
  }
  in.seekg(0, std::ios::beg);
  std::vector<std::vector<float>> rows(n, std::vector<float>(dim));
  for (std::size_t i = 0; i < n; ++i) {
    in.read(reinterpret_cast<char*>(rows[i].data()),
            static_cast<std::streamsize>(dim * sizeof(float)));
    if (!in) throw ManifestError("embeddings file " + path + ": read failed at row " +
                                 std::to_string(i));
  }
  static_assert(std::endian::native == std::endian::little,
                "sidecar embeddings assume a little-endian host");
  return rows;
}

}  // namespace

FrameStore FrameStore::load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ManifestError("cannot open manifest: " + path);

  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ManifestError("malformed manifest " + path + ": " + e.what());
  }

  if (!doc.is_object()) throw ManifestError("manifest root must be a JSON object");
  if (!doc.contains("video_id") || !doc["video_id"].is_string())
    throw ManifestError("manifest missing string \"video_id\"");
  if (!doc.contains("dimension") || !doc["dimension"].is_number_integer())
    throw ManifestError("manifest missing integer \"dimension\"");
  if (!doc.contains("frames") || !doc["frames"].is_array())
    throw ManifestError("manifest missing array \"frames\"");

  const int dimension = doc["dimension"].get<int>();
  if (dimension <= 0) throw ManifestError("\"dimension\" must be positive");

  double fps = 1.0;
  if (doc.contains("fps")) {
    if (!doc["fps"].is_number()) throw ManifestError("\"fps\" must be a number");
    fps = doc["fps"].get<double>();
  }

  const bool has_sidecar = doc.contains("embeddings_file") && !doc["embeddings_file"].is_null();

  std::vector<Frame> frames;
  frames.reserve(doc["frames"].size());
  for (std::size_t pos = 0; pos < doc["frames"].size(); ++pos) {
    const json& jf = doc["frames"][pos];
    if (!jf.is_object())
      throw ManifestError("frames[" + std::to_string(pos) + "] is not an object");
    Frame f;
    if (!jf.contains("index") || !jf["index"].is_number_integer())
      throw ManifestError("frames[" + std::to_string(pos) + "] missing integer \"index\"");
    f.index = jf["index"].get<int>();
    if (f.index < 0)
      throw ManifestError("frame " + std::to_string(f.index) + ": index must be >= 0");
    if (!jf.contains("timestamp_s") || !jf["timestamp_s"].is_number())
      throw ManifestError("frame " + std::to_string(f.index) +
                          ": missing numeric \"timestamp_s\"");
    f.timestamp_s = jf["timestamp_s"].get<double>();
    if (f.timestamp_s < 0.0)
      throw ManifestError("frame " + std::to_string(f.index) + ": negative timestamp");
    if (!jf.contains("caption") || !jf["caption"].is_string())
      throw ManifestError("frame " + std::to_string(f.index) + ": missing string \"caption\"");
    f.caption = jf["caption"].get<std::string>();
    if (jf.contains("image_ref") && !jf["image_ref"].is_null())
      f.image_ref = jf["image_ref"].get<std::string>();

    if (jf.contains("embedding") && !jf["embedding"].is_null()) {
      if (has_sidecar)
        throw ManifestError("frame " + std::to_string(f.index) +
                            ": inline embedding forbidden when \"embeddings_file\" is set");
      f.embedding = parse_inline_embedding(jf["embedding"], f.index);
    } else if (!has_sidecar) {
      throw ManifestError("frame " + std::to_string(f.index) +
                          ": no embedding and no \"embeddings_file\"");
    }
    frames.push_back(std::move(f));
  }

  if (has_sidecar) {
    std::string sidecar = doc["embeddings_file"].get<std::string>();
    // Relative sidecar paths resolve against the manifest's directory.
    if (!sidecar.empty() && sidecar.front() != '/') {
      auto slash = path.find_last_of('/');
      if (slash != std::string::npos) sidecar = path.substr(0, slash + 1) + sidecar;
    }
    auto rows = read_sidecar(sidecar, frames.size(), static_cast<std::size_t>(dimension));
    for (std::size_t i = 0; i < frames.size(); ++i) frames[i].embedding = std::move(rows[i]);
  }

  return from_frames(doc["video_id"].get<std::string>(), dimension, fps, std::move(frames));
}

FrameStore FrameStore::from_frames(std::string video_id, int dimension, double fps,
                                   std::vector<Frame> frames) {
  if (frames.empty()) throw ManifestError("frame store must be non-empty");
  if (dimension <= 0) throw ManifestError("dimension must be positive");
  if (!(fps > 0.0)) throw ManifestError("fps must be positive");

  FrameStore store;
  store.video_id_ = std::move(video_id);
  store.dimension_ = dimension;
  store.fps_ = fps;

  for (std::size_t i = 0; i < frames.size(); ++i) {
    Frame& f = frames[i];
    if (f.index < 0)
      throw ManifestError("frame " + std::to_string(f.index) + ": index must be >= 0");
    if (i > 0) {
      const Frame& prev = frames[i - 1];
      if (f.index <= prev.index)
        throw ManifestError("frame " + std::to_string(f.index) +
                            ": indices must be strictly increasing");
      if (f.timestamp_s <= prev.timestamp_s)
        throw ManifestError("frame " + std::to_string(f.index) +
                            ": timestamps must be strictly increasing with index");
    }
    if (static_cast<int>(f.embedding.size()) != dimension)
      throw ManifestError("frame " + std::to_string(f.index) + ": embedding length " +
                          std::to_string(f.embedding.size()) + " does not match dimension " +
                          std::to_string(dimension));
    normalize_embedding(f.embedding, f.index);
  }

  store.frames_ = std::move(frames);
  store.rebuild_lookup();
  return store;
}

void FrameStore::rebuild_lookup() {
  position_of_.clear();
  position_of_.reserve(frames_.size());
  for (std::size_t i = 0; i < frames_.size(); ++i) position_of_[frames_[i].index] = i;
}

bool FrameStore::has_index(int frame_index) const {
  return position_of_.find(frame_index) != position_of_.end();
}

const Frame& FrameStore::frame(int frame_index) const {
  auto it = position_of_.find(frame_index);
  if (it == position_of_.end())
    throw ManifestError("unknown frame index " + std::to_string(frame_index) + " in video " +
                        video_id_);
  return frames_[it->second];
}

FrameIndexSet FrameStore::all_indices() const {
  std::vector<int> ids;
  ids.reserve(frames_.size());
  for (const Frame& f : frames_) ids.push_back(f.index);
  return FrameIndexSet(std::move(ids));
}

FrameIndexSet FrameStore::uniform_sample(double fraction, const FrameIndexSet& exclude) const {
  return uniform_sample_offset(fraction, exclude, 0);
}

FrameIndexSet FrameStore::uniform_sample_offset(double fraction, const FrameIndexSet& exclude,
                                                std::size_t offset) const {
  if (!(fraction > 0.0) || fraction > 1.0)
    throw ConfigError("sampling fraction must be in (0, 1]");
  const auto requested =
      static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(frames_.size())));
  return sample_count_offset(requested, exclude, offset);
}

FrameIndexSet FrameStore::sample_count_offset(std::size_t count, const FrameIndexSet& exclude,
                                              std::size_t offset) const {
  std::vector<int> eligible;
  eligible.reserve(frames_.size());
  for (const Frame& f : frames_)
    if (!exclude.contains(f.index)) eligible.push_back(f.index);

  const std::size_t n = eligible.size();
  if (n == 0) return FrameIndexSet{};
  if (count >= n) return FrameIndexSet(std::move(eligible));

  // Even spacing: position floor(i*n/m) over the eligible list, rotated by
  // offset. The stride n/m >= 1 keeps the m picks distinct.
  std::vector<int> picked;
  picked.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t pos = (i * n / count + offset) % n;
    picked.push_back(eligible[pos]);
  }
  return FrameIndexSet(std::move(picked));
}

std::vector<std::string> FrameStore::captions_for(const FrameIndexSet& ids) const {
  std::vector<std::string> out;
  out.reserve(ids.size());
  for (int id : ids) out.push_back(frame(id).caption);
  return out;
}

Eigen::MatrixXd FrameStore::embeddings_for(const FrameIndexSet& ids) const {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(ids.size()), dimension_);
  Eigen::Index row = 0;
  for (int id : ids) {
    const Frame& f = frame(id);
    for (int j = 0; j < dimension_; ++j) out(row, j) = static_cast<double>(f.embedding[j]);
    ++row;
  }
  return out;
}

Eigen::MatrixXd FrameStore::all_embeddings() const {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(frames_.size()), dimension_);
  for (std::size_t i = 0; i < frames_.size(); ++i)
    for (int j = 0; j < dimension_; ++j)
      out(static_cast<Eigen::Index>(i), j) = static_cast<double>(frames_[i].embedding[j]);
  return out;
}

nlohmann::json FrameStore::to_manifest_json() const {
  json frames = json::array();
  for (const Frame& f : frames_) {
    json jf;
    jf["index"] = f.index;
    jf["timestamp_s"] = f.timestamp_s;
    jf["caption"] = f.caption;
    if (!f.image_ref.empty()) jf["image_ref"] = f.image_ref;
    jf["embedding"] = f.embedding;
    frames.push_back(std::move(jf));
  }
  json doc;
  doc["video_id"] = video_id_;
  doc["dimension"] = dimension_;
  doc["fps"] = fps_;
  doc["frames"] = std::move(frames);
  return doc;
}

}  // namespace svagent
