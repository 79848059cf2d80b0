#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "stgc/graph.hpp"
#include "stgc/layer.hpp"
#include "stgc/matrix.hpp"

namespace stgc {

/// One recorded action: T frames of n_joints 3D coordinates plus the bone
/// list of the skeleton it was captured on.
struct SkeletonSequence {
  std::size_t n_joints = 0;
  std::size_t frames = 0;
  std::vector<double> coords;  // frames x n_joints x 3, row-major
  std::vector<Bone> bones;
  std::size_t label = 0;

  double& at(std::size_t t, std::size_t joint, std::size_t axis) {
    return coords[(t * n_joints + joint) * 3 + axis];
  }
  double at(std::size_t t, std::size_t joint, std::size_t axis) const {
    return coords[(t * n_joints + joint) * 3 + axis];
  }

  /// n_joints x 3 matrix of frame t.
  Matrix frame(std::size_t t) const;
  SignalSequence signals() const;
  StaticGraph graph() const { return build_from_bones(n_joints, bones); }

  /// Sizes, finite coordinates, valid bones.
  void validate() const;

  friend bool operator==(const SkeletonSequence&, const SkeletonSequence&) = default;
};

enum class Split : std::uint8_t { train = 0, test = 1 };

struct Dataset {
  std::vector<SkeletonSequence> sequences;
  std::vector<std::string> class_names;
  std::vector<Split> split;  // one entry per sequence

  std::size_t n_classes() const noexcept { return class_names.size(); }
  /// Labels in range, split sized to match, every sequence valid.
  void validate() const;
  /// Sequences of one split, in file order.
  std::vector<SkeletonSequence> subset(Split which) const;

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

/// Subtracts the per-frame joint mean from every joint.
SkeletonSequence center_orthocenter(const SkeletonSequence& seq);

inline constexpr std::size_t kDefaultSegments = 12;

/// Splits the frames into n_segments contiguous near-equal segments (the
/// first T mod n_segments are one frame longer) and draws one frame
/// uniformly from each. Sequences shorter than n_segments are padded by
/// repeating the last frame first.
SkeletonSequence segment_sample(const SkeletonSequence& seq, std::size_t n_segments,
                                std::mt19937_64& rng);

/// Deterministic variant picking the middle frame of every segment.
SkeletonSequence segment_center(const SkeletonSequence& seq, std::size_t n_segments);

/// Frame indices of the segment partition: [begin, end) per segment.
std::vector<std::pair<std::size_t, std::size_t>> segment_bounds(std::size_t frames,
                                                                std::size_t n_segments);

inline constexpr double kJitterLow = 0.98;
inline constexpr double kJitterHigh = 1.02;

struct JitterResult {
  SkeletonSequence sequence;
  double scale = 1.0;
};

/// Multiplies every coordinate by one s ~ U[0.98, 1.02].
JitterResult scale_jitter(const SkeletonSequence& seq, std::mt19937_64& rng);
SkeletonSequence scale_sequence(const SkeletonSequence& seq, double scale);

struct SynthSpec {
  std::size_t n_classes = 4;
  std::size_t n_per_class = 75;
  std::size_t n_joints = 15;
  std::size_t frames = 12;
  double noise = 0.02;
  /// Fraction of each class placed in the test split (rounded).
  double test_fraction = 1.0 / 3.0;
};

/// Skeleton used by the generator: a four-joint spine with two arms hanging
/// off joint 2 and two legs off joint 0; the remaining joints are split
/// across the four limbs. Returns the bones and, per limb, its joints in
/// order from the attachment point outward.
struct SynthSkeleton {
  std::vector<Bone> bones;
  std::vector<std::vector<std::size_t>> limbs;
};
SynthSkeleton synth_skeleton(std::size_t n_joints);

/// Class c lifts limb (c mod 4) with a raised-cosine motion at 1 + c/4
/// cycles per sequence and a random phase; every sequence also gets a random
/// global offset and Gaussian coordinate noise.
Dataset synth_dataset(const SynthSpec& spec, std::mt19937_64& rng);

/// Text header plus binary payload:
///   STGCDS v1 <n_seq>
///   classes <C> <name_0> ... <name_{C-1}>
///   per sequence: `<label> <n_joints> <T> <n_bones> <train|test>` line,
///   a line of 2*n_bones joint indices, then T*n_joints*3 little-endian f64.
std::vector<std::uint8_t> encode_dataset(const Dataset& dataset);
Dataset decode_dataset(std::span<const std::uint8_t> bytes);
void save_dataset(const Dataset& dataset, const std::filesystem::path& path);
Dataset load_dataset(const std::filesystem::path& path);

}  // namespace stgc
