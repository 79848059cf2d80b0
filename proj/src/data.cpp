#include "stgc/data.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <numbers>
#include <sstream>

#include "byte_io.hpp"
#include "stgc/errors.hpp"

namespace stgc {
namespace {

SkeletonSequence with_frames(const SkeletonSequence& seq, const std::vector<std::size_t>& picks) {
  SkeletonSequence out = seq;
  out.frames = picks.size();
  out.coords.assign(out.frames * seq.n_joints * 3, 0.0);
  const std::size_t stride = seq.n_joints * 3;
  for (std::size_t j = 0; j < picks.size(); ++j)
    std::copy_n(seq.coords.begin() + static_cast<std::ptrdiff_t>(picks[j] * stride), stride,
                out.coords.begin() + static_cast<std::ptrdiff_t>(j * stride));
  return out;
}

SkeletonSequence pad_to(const SkeletonSequence& seq, std::size_t frames) {
  if (seq.frames >= frames) return seq;
  std::vector<std::size_t> picks;
  for (std::size_t t = 0; t < frames; ++t) picks.push_back(std::min(t, seq.frames - 1));
  return with_frames(seq, picks);
}

// Line-oriented cursor over the text part of the dataset format.
class TextCursor {
 public:
  explicit TextCursor(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::vector<std::string> tokens(const char* what) {
    const std::size_t start = pos_;
    while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
    if (pos_ == bytes_.size())
      throw FormatError(std::string("truncated input while reading ") + what, start, line_ + 1);
    std::string text(bytes_.begin() + static_cast<std::ptrdiff_t>(start),
                     bytes_.begin() + static_cast<std::ptrdiff_t>(pos_));
    ++pos_;
    ++line_;
    line_start_ = start;
    std::istringstream ss(text);
    std::vector<std::string> out{std::istream_iterator<std::string>(ss),
                                 std::istream_iterator<std::string>()};
    return out;
  }

  std::size_t to_size(const std::string& tok, const char* what) const {
    std::size_t v = 0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size())
      throw FormatError(std::string("expected an unsigned integer for ") + what + ", got \"" +
                            tok + "\"",
                        line_start_, line_);
    return v;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw FormatError(what, line_start_, line_);
  }

  std::size_t position() const noexcept { return pos_; }
  std::span<const std::uint8_t> rest() const noexcept { return bytes_.subspan(pos_); }
  void advance(std::size_t n) noexcept { pos_ += n; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
  std::size_t line_ = 0;
  std::size_t line_start_ = 0;
};

}  // namespace

Matrix SkeletonSequence::frame(std::size_t t) const {
  Matrix m(n_joints, 3);
  std::copy_n(coords.begin() + static_cast<std::ptrdiff_t>(t * n_joints * 3), n_joints * 3,
              m.values().begin());
  return m;
}

SignalSequence SkeletonSequence::signals() const {
  SignalSequence out;
  out.reserve(frames);
  for (std::size_t t = 0; t < frames; ++t) out.push_back(frame(t));
  return out;
}

void SkeletonSequence::validate() const {
  if (n_joints == 0 || frames == 0) throw DimensionError("skeleton sequence is empty");
  if (coords.size() != frames * n_joints * 3)
    throw DimensionError("skeleton coordinates do not match frames x joints x 3");
  for (double v : coords)
    if (!std::isfinite(v)) throw DimensionError("skeleton sequence has a non-finite coordinate");
  for (const auto& [i, j] : bones)
    if (i >= n_joints || j >= n_joints || i == j) throw GraphError("skeleton bone is invalid");
}

void Dataset::validate() const {
  if (split.size() != sequences.size())
    throw DimensionError("dataset split assignment does not cover every sequence");
  for (const SkeletonSequence& s : sequences) {
    s.validate();
    if (s.label >= n_classes()) throw DimensionError("dataset label out of range");
  }
}

std::vector<SkeletonSequence> Dataset::subset(Split which) const {
  std::vector<SkeletonSequence> out;
  for (std::size_t i = 0; i < sequences.size(); ++i)
    if (split[i] == which) out.push_back(sequences[i]);
  return out;
}

SkeletonSequence center_orthocenter(const SkeletonSequence& seq) {
  seq.validate();
  SkeletonSequence out = seq;
  const double inv = 1.0 / static_cast<double>(seq.n_joints);
  for (std::size_t t = 0; t < seq.frames; ++t)
    for (std::size_t a = 0; a < 3; ++a) {
      double mean = 0.0;
      for (std::size_t j = 0; j < seq.n_joints; ++j) mean += seq.at(t, j, a);
      mean *= inv;
      for (std::size_t j = 0; j < seq.n_joints; ++j) out.at(t, j, a) = seq.at(t, j, a) - mean;
    }
  return out;
}

std::vector<std::pair<std::size_t, std::size_t>> segment_bounds(std::size_t frames,
                                                                std::size_t n_segments) {
  if (n_segments == 0) throw DimensionError("segment count must be positive");
  if (frames < n_segments) throw DimensionError("fewer frames than segments");
  const std::size_t base = frames / n_segments;
  const std::size_t extra = frames % n_segments;
  std::vector<std::pair<std::size_t, std::size_t>> out;
  std::size_t begin = 0;
  for (std::size_t j = 0; j < n_segments; ++j) {
    const std::size_t len = base + (j < extra ? 1 : 0);
    out.emplace_back(begin, begin + len);
    begin += len;
  }
  return out;
}

SkeletonSequence segment_sample(const SkeletonSequence& seq, std::size_t n_segments,
                                std::mt19937_64& rng) {
  seq.validate();
  const SkeletonSequence padded = pad_to(seq, n_segments);
  std::vector<std::size_t> picks;
  for (const auto& [begin, end] : segment_bounds(padded.frames, n_segments)) {
    std::uniform_int_distribution<std::size_t> pick(begin, end - 1);
    picks.push_back(pick(rng));
  }
  return with_frames(padded, picks);
}

SkeletonSequence segment_center(const SkeletonSequence& seq, std::size_t n_segments) {
  seq.validate();
  const SkeletonSequence padded = pad_to(seq, n_segments);
  std::vector<std::size_t> picks;
  for (const auto& [begin, end] : segment_bounds(padded.frames, n_segments))
    picks.push_back(begin + (end - begin - 1) / 2);
  return with_frames(padded, picks);
}

SkeletonSequence scale_sequence(const SkeletonSequence& seq, double scale) {
  SkeletonSequence out = seq;
  for (double& v : out.coords) v *= scale;
  return out;
}

JitterResult scale_jitter(const SkeletonSequence& seq, std::mt19937_64& rng) {
  seq.validate();
  std::uniform_real_distribution<double> u(kJitterLow, kJitterHigh);
  const double s = u(rng);
  return {scale_sequence(seq, s), s};
}

SynthSkeleton synth_skeleton(std::size_t n_joints) {
  if (n_joints < 4) throw DimensionError("synthetic skeleton needs at least 4 joints");
  SynthSkeleton sk;
  for (std::size_t j = 0; j + 1 < 4; ++j) sk.bones.emplace_back(j, j + 1);
  const std::size_t attach[4] = {2, 2, 0, 0};
  const std::size_t rest = n_joints - 4;
  std::size_t next = 4;
  sk.limbs.resize(4);
  for (std::size_t limb = 0; limb < 4; ++limb) {
    const std::size_t len = rest / 4 + (limb < rest % 4 ? 1 : 0);
    std::size_t parent = attach[limb];
    for (std::size_t s = 0; s < len; ++s) {
      sk.bones.emplace_back(parent, next);
      sk.limbs[limb].push_back(next);
      parent = next++;
    }
  }
  return sk;
}

Dataset synth_dataset(const SynthSpec& spec, std::mt19937_64& rng) {
  if (spec.n_classes < 1 || spec.n_per_class < 1)
    throw DimensionError("synthetic dataset needs at least one class and one sample per class");
  if (spec.n_joints < 4 || spec.frames < 4)
    throw DimensionError("synthetic dataset needs n_joints >= 4 and T >= 4");
  if (!(spec.noise >= 0.0) || !(spec.test_fraction >= 0.0 && spec.test_fraction <= 1.0))
    throw DimensionError("synthetic dataset noise must be >= 0 and test_fraction in [0, 1]");

  const SynthSkeleton sk = synth_skeleton(spec.n_joints);
  for (std::size_t c = 0; c < std::min<std::size_t>(spec.n_classes, 4); ++c)
    if (sk.limbs[c].empty())
      throw DimensionError("synthetic skeleton has an empty limb; use more joints");

  // Rest pose: spine along +y, arms sideways from the neck, legs down from the hip.
  std::vector<std::array<double, 3>> rest(spec.n_joints);
  for (std::size_t j = 0; j < 4; ++j) rest[j] = {0.0, 0.3 * static_cast<double>(j), 0.0};
  const std::array<double, 3> step[4] = {
      {-0.25, -0.05, 0.0}, {0.25, -0.05, 0.0}, {-0.08, -0.4, 0.0}, {0.08, -0.4, 0.0}};
  const std::size_t attach[4] = {2, 2, 0, 0};
  for (std::size_t limb = 0; limb < 4; ++limb) {
    std::array<double, 3> p = rest[attach[limb]];
    for (std::size_t j : sk.limbs[limb]) {
      for (std::size_t a = 0; a < 3; ++a) p[a] += step[limb][a];
      rest[j] = p;
    }
  }
  // Lift direction per limb: arms swing up and forward, legs kick forward.
  const std::array<double, 3> lift[4] = {
      {0.0, 1.0, 0.5}, {0.0, 1.0, 0.5}, {0.0, 0.4, 1.0}, {0.0, 0.4, 1.0}};
  constexpr double kAmplitude = 0.5;

  std::uniform_real_distribution<double> phase_dist(0.0, 2.0 * std::numbers::pi);
  std::uniform_real_distribution<double> offset_dist(-1.0, 1.0);
  std::normal_distribution<double> noise_dist(0.0, 1.0);

  Dataset ds;
  for (std::size_t c = 0; c < spec.n_classes; ++c) ds.class_names.push_back("class" + std::to_string(c));
  const auto n_test =
      static_cast<std::size_t>(std::lround(spec.test_fraction * static_cast<double>(spec.n_per_class)));

  for (std::size_t c = 0; c < spec.n_classes; ++c) {
    const std::size_t limb = c % 4;
    const double cycles = 1.0 + static_cast<double>(c / 4) * 0.5;
    const auto& joints = sk.limbs[limb];
    for (std::size_t s = 0; s < spec.n_per_class; ++s) {
      SkeletonSequence seq;
      seq.n_joints = spec.n_joints;
      seq.frames = spec.frames;
      seq.bones = sk.bones;
      seq.label = c;
      seq.coords.assign(spec.frames * spec.n_joints * 3, 0.0);
      const double phase = phase_dist(rng);
      const std::array<double, 3> offset{offset_dist(rng), offset_dist(rng), offset_dist(rng)};
      for (std::size_t t = 0; t < spec.frames; ++t) {
        const double angle =
            2.0 * std::numbers::pi * cycles * static_cast<double>(t) / static_cast<double>(spec.frames) +
            phase;
        const double raise = kAmplitude * 0.5 * (1.0 - std::cos(angle));
        for (std::size_t j = 0; j < spec.n_joints; ++j)
          for (std::size_t a = 0; a < 3; ++a) seq.at(t, j, a) = rest[j][a] + offset[a];
        for (std::size_t depth = 0; depth < joints.size(); ++depth) {
          const double reach = static_cast<double>(depth + 1) / static_cast<double>(joints.size());
          for (std::size_t a = 0; a < 3; ++a) seq.at(t, joints[depth], a) += raise * reach * lift[limb][a];
        }
      }
      if (spec.noise > 0.0)
        for (double& v : seq.coords) v += spec.noise * noise_dist(rng);
      ds.sequences.push_back(std::move(seq));
      ds.split.push_back(s < spec.n_per_class - n_test ? Split::train : Split::test);
    }
  }
  return ds;
}

std::vector<std::uint8_t> encode_dataset(const Dataset& dataset) {
  dataset.validate();
  std::ostringstream header;
  header << "STGCDS v1 " << dataset.sequences.size() << '\n';
  header << "classes " << dataset.n_classes();
  for (const std::string& name : dataset.class_names) {
    if (name.empty() || name.find_first_of(" \t\r\n") != std::string::npos)
      throw DimensionError("class names must be non-empty and contain no whitespace");
    header << ' ' << name;
  }
  header << '\n';
  std::string text = header.str();
  std::vector<std::uint8_t> out(text.begin(), text.end());
  detail::ByteWriter w(out);
  for (std::size_t i = 0; i < dataset.sequences.size(); ++i) {
    const SkeletonSequence& s = dataset.sequences[i];
    std::ostringstream line;
    line << s.label << ' ' << s.n_joints << ' ' << s.frames << ' ' << s.bones.size() << ' '
         << (dataset.split[i] == Split::train ? "train" : "test") << '\n';
    for (std::size_t b = 0; b < s.bones.size(); ++b)
      line << (b ? " " : "") << s.bones[b].first << ' ' << s.bones[b].second;
    line << '\n';
    const std::string l = line.str();
    out.insert(out.end(), l.begin(), l.end());
    w.put_doubles(s.coords);
  }
  return out;
}

Dataset decode_dataset(std::span<const std::uint8_t> bytes) {
  TextCursor cur(bytes);
  auto head = cur.tokens("dataset header");
  if (head.size() != 3 || head[0] != "STGCDS") cur.fail("not an STGCDS dataset file");
  if (head[1] != "v1") cur.fail("unsupported dataset version \"" + head[1] + "\"");
  const std::size_t n_seq = cur.to_size(head[2], "sequence count");

  Dataset ds;
  auto classes = cur.tokens("class list");
  if (classes.size() < 2 || classes[0] != "classes") cur.fail("expected `classes <C> names...`");
  const std::size_t n_classes = cur.to_size(classes[1], "class count");
  if (classes.size() != 2 + n_classes) cur.fail("class count does not match the names given");
  ds.class_names.assign(classes.begin() + 2, classes.end());

  for (std::size_t i = 0; i < n_seq; ++i) {
    auto meta = cur.tokens("sequence header");
    if (meta.size() != 5) cur.fail("sequence header needs `label n_joints T n_bones split`");
    SkeletonSequence s;
    s.label = cur.to_size(meta[0], "label");
    s.n_joints = cur.to_size(meta[1], "n_joints");
    s.frames = cur.to_size(meta[2], "T");
    const std::size_t n_bones = cur.to_size(meta[3], "n_bones");
    if (meta[4] != "train" && meta[4] != "test") cur.fail("split must be train or test");
    if (s.label >= n_classes) cur.fail("label out of range");
    if (s.n_joints == 0 || s.frames == 0) cur.fail("sequence must have joints and frames");

    auto bone_tokens = cur.tokens("bone list");
    if (bone_tokens.size() != 2 * n_bones) cur.fail("bone line does not hold 2 * n_bones indices");
    for (std::size_t b = 0; b < n_bones; ++b) {
      const std::size_t a = cur.to_size(bone_tokens[2 * b], "bone index");
      const std::size_t c = cur.to_size(bone_tokens[2 * b + 1], "bone index");
      if (a >= s.n_joints || c >= s.n_joints || a == c) cur.fail("invalid bone");
      s.bones.emplace_back(a, c);
    }

    const std::size_t count = s.frames * s.n_joints * 3;
    if (count / 3 / s.frames != s.n_joints || cur.rest().size() / sizeof(double) < count)
      throw FormatError("truncated input while reading coordinates", cur.position());
    s.coords.resize(count);
    detail::ByteReader r(cur.rest(), cur.position());
    r.get_doubles(s.coords, "coordinates");
    cur.advance(count * sizeof(double));
    for (double v : s.coords)
      if (!std::isfinite(v)) throw FormatError("non-finite coordinate", cur.position());

    ds.sequences.push_back(std::move(s));
    ds.split.push_back(meta[4] == "train" ? Split::train : Split::test);
  }
  if (!cur.rest().empty()) throw FormatError("trailing bytes after last sequence", cur.position());
  return ds;
}

void save_dataset(const Dataset& dataset, const std::filesystem::path& path) {
  const std::vector<std::uint8_t> bytes = encode_dataset(dataset);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write dataset " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open dataset " + path.string());
  const std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(in),
                                        std::istreambuf_iterator<char>()};
  return decode_dataset(bytes);
}

}  // namespace stgc
