#pragma once

#include <Eigen/Dense>
#include <nlohmann/json_fwd.hpp>

#include <string>
#include <unordered_map>
#include <vector>

#include "svagent/types.hpp"

namespace svagent {

/// One record of the per-video frame database (1 FPS sampling upstream).
struct Frame {
  int index = 0;
  double timestamp_s = 0.0;
  std::string caption;
  std::vector<float> embedding;
  std::string image_ref;  // empty when the manifest carries none

  bool operator==(const Frame&) const = default;
};

/// Immutable frame database for one video: ordered frames with captions and
/// unit-norm embeddings. Safe for unrestricted concurrent reads after load.
class FrameStore {
public:
  /// Loads and validates a manifest (see docs/formats.md for the schema).
  /// Embeddings come inline or from a raw little-endian float32 sidecar file;
  /// both are L2-normalized here unless already within 1e-6 of unit norm,
  /// which keeps reload of a saved store byte-stable.
  static FrameStore load_manifest(const std::string& path);

  /// Builds a store from in-memory frames, running the same validation and
  /// normalization as load_manifest.
  static FrameStore from_frames(std::string video_id, int dimension, double fps,
                                std::vector<Frame> frames);

  const std::string& video_id() const { return video_id_; }
  int dimension() const { return dimension_; }
  double fps() const { return fps_; }
  std::size_t size() const { return frames_.size(); }
  const std::vector<Frame>& frames() const { return frames_; }

  bool has_index(int frame_index) const;
  const Frame& frame(int frame_index) const;  // throws ManifestError if unknown
  FrameIndexSet all_indices() const;

  /// Frame index of the i-th frame in store order.
  int index_at(std::size_t position) const { return frames_.at(position).index; }

  /// Deterministic even-spaced sample: ceil(fraction*size()) indices drawn
  /// from the frames not in `exclude`. Returns the whole eligible pool when
  /// it is smaller than the requested count.
  FrameIndexSet uniform_sample(double fraction, const FrameIndexSet& exclude) const;

  /// uniform_sample with the pick pattern rotated by `offset` positions over
  /// the eligible pool; offset 0 reduces to uniform_sample. Used by the
  /// suggestion-fallback path, where the run seed supplies the offset.
  FrameIndexSet uniform_sample_offset(double fraction, const FrameIndexSet& exclude,
                                      std::size_t offset) const;

  /// Explicit-count variant used by the suggestion fallback.
  FrameIndexSet sample_count_offset(std::size_t count, const FrameIndexSet& exclude,
                                    std::size_t offset) const;

  /// Captions in ascending frame-index order. Throws on unknown index.
  std::vector<std::string> captions_for(const FrameIndexSet& ids) const;

  /// |ids| x D matrix, row order ascending frame index. Throws on unknown index.
  Eigen::MatrixXd embeddings_for(const FrameIndexSet& ids) const;

  /// size() x D matrix over all frames in store order.
  Eigen::MatrixXd all_embeddings() const;

  /// Inverse of load_manifest for round-trips; embeddings are emitted inline.
  nlohmann::json to_manifest_json() const;

  bool operator==(const FrameStore&) const = default;

private:
  FrameStore() = default;
  void rebuild_lookup();

  std::string video_id_;
  int dimension_ = 0;
  double fps_ = 1.0;
  std::vector<Frame> frames_;
  std::unordered_map<int, std::size_t> position_of_;
};

}  // namespace svagent
