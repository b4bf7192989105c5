#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "hv3d/error.hpp"
#include "hv3d/fileio.hpp"
#include "hv3d/plane.hpp"

namespace hv3d {

// Headerless planar video: 8-bit YUV 4:2:0 (Y, then U, then V, per frame) or
// a single 8-bit plane per frame for depth maps.
enum class RawLayout { yuv420, gray8 };

inline std::uintmax_t raw_frame_bytes(RawLayout layout, int width, int height) {
  std::uintmax_t luma = static_cast<std::uintmax_t>(width) * height;
  return layout == RawLayout::yuv420 ? luma + 2 * (luma / 4) : luma;
}

namespace detail {

inline void check_dimensions(RawLayout layout, int width, int height) {
  if (width <= 0 || height <= 0)
    throw ConfigError("frame dimensions must be positive, got " +
                      std::to_string(width) + "x" + std::to_string(height));
  if (layout == RawLayout::yuv420 && (width % 2 != 0 || height % 2 != 0))
    throw ConfigError("YUV 4:2:0 needs even dimensions, got " +
                      std::to_string(width) + "x" + std::to_string(height));
}

}  // namespace detail

// Sequential reader over a raw file. The file length is validated up front
// against the requested frame count, so a truncated file fails before any
// frame is decoded. Only one frame is resident at a time.
class RawVideoReader {
 public:
  RawVideoReader(const fs::path& path, RawLayout layout, int width, int height,
                 int frame_count)
      : path_(path),
        layout_(layout),
        width_(width),
        height_(height),
        frame_count_(frame_count) {
    detail::check_dimensions(layout, width, height);
    if (frame_count < 1)
      throw ConfigError("frame count must be at least 1 for '" +
                        path.string() + "'");
    std::error_code ec;
    auto size = fs::file_size(path, ec);
    if (ec) throw IngestError("cannot open '" + path.string() + "': " + ec.message());
    auto frame_bytes = raw_frame_bytes(layout, width, height);
    auto needed = frame_bytes * static_cast<std::uintmax_t>(frame_count);
    if (size < needed) {
      auto complete = size / frame_bytes;
      throw IngestError("'" + path.string() + "' is truncated: frame " +
                        std::to_string(complete) + " starts at byte offset " +
                        std::to_string(complete * frame_bytes) + " and needs " +
                        std::to_string(frame_bytes) + " bytes, but the file "
                        "ends at byte offset " + std::to_string(size) +
                        " (expected at least " + std::to_string(needed) + ")");
    }
    in_.open(path, std::ios::binary);
    if (!in_) throw IngestError("cannot open '" + path.string() + "'");
  }

  int width() const { return width_; }
  int height() const { return height_; }
  int frame_count() const { return frame_count_; }
  int frames_read() const { return index_; }

  std::optional<Frame> next_frame() {
    if (layout_ != RawLayout::yuv420)
      throw ContractError("next_frame() on a gray8 reader");
    if (index_ >= frame_count_) return std::nullopt;
    Frame f(width_, height_);
    read_into(f.y);
    read_into(f.u);
    read_into(f.v);
    ++index_;
    return f;
  }

  std::optional<DepthFrame> next_depth() {
    if (layout_ != RawLayout::gray8)
      throw ContractError("next_depth() on a yuv420 reader");
    if (index_ >= frame_count_) return std::nullopt;
    DepthFrame f{VideoPlane(width_, height_)};
    read_into(f.d);
    ++index_;
    return f;
  }

 private:
  void read_into(VideoPlane& p) {
    auto offset = static_cast<std::uintmax_t>(in_.tellg());
    in_.read(reinterpret_cast<char*>(p.data()),
             static_cast<std::streamsize>(p.size()));
    if (!in_)
      throw IngestError("read failed in '" + path_.string() +
                        "' at byte offset " + std::to_string(offset));
  }

  fs::path path_;
  RawLayout layout_;
  int width_;
  int height_;
  int frame_count_;
  int index_ = 0;
  std::ifstream in_;
};

inline std::vector<Frame> read_yuv420_sequence(const fs::path& path, int width,
                                               int height, int frame_count) {
  RawVideoReader reader(path, RawLayout::yuv420, width, height, frame_count);
  std::vector<Frame> frames;
  frames.reserve(frame_count);
  while (auto f = reader.next_frame()) frames.push_back(std::move(*f));
  return frames;
}

inline std::vector<DepthFrame> read_depth_sequence(const fs::path& path,
                                                   int width, int height,
                                                   int frame_count) {
  RawVideoReader reader(path, RawLayout::gray8, width, height, frame_count);
  std::vector<DepthFrame> frames;
  frames.reserve(frame_count);
  while (auto f = reader.next_depth()) frames.push_back(std::move(*f));
  return frames;
}

inline void write_plane(std::ostream& out, const VideoPlane& p) {
  out.write(reinterpret_cast<const char*>(p.data()),
            static_cast<std::streamsize>(p.size()));
}

inline void write_frame(std::ostream& out, const Frame& f) {
  write_plane(out, f.y);
  write_plane(out, f.u);
  write_plane(out, f.v);
}

inline void write_yuv420_sequence(const fs::path& path,
                                  const std::vector<Frame>& frames) {
  AtomicOutputFile file(path, true);
  for (const auto& f : frames) write_frame(file.stream(), f);
  file.commit();
}

inline void write_depth_sequence(const fs::path& path,
                                 const std::vector<DepthFrame>& frames) {
  AtomicOutputFile file(path, true);
  for (const auto& f : frames) write_plane(file.stream(), f.d);
  file.commit();
}

// ---------------------------------------------------------------------------
// Manifest

struct ManifestEntry {
  std::string label;
  fs::path left_path;
  fs::path right_path;
  fs::path depth_path;
  int width = 0;
  int height = 0;
  double fps = 0.0;
  int frame_count = 0;
  // Set on distorted entries: label of the pristine entry they derive from
  // and the distortion identifier used to join against MOS tables.
  std::string reference;
  std::string distortion;

  bool is_distorted() const { return !reference.empty(); }
};

struct Manifest {
  std::vector<ManifestEntry> entries;

  const ManifestEntry& find(const std::string& label) const {
    for (const auto& e : entries)
      if (e.label == label) return e;
    throw ConfigError("manifest has no entry labelled '" + label + "'");
  }
  const ManifestEntry* find_distorted(const std::string& reference,
                                      const std::string& distortion) const {
    for (const auto& e : entries)
      if (e.reference == reference && e.distortion == distortion) return &e;
    return nullptr;
  }
};

namespace detail {

struct RawRecord {
  int line = 0;
  std::vector<std::pair<std::string, std::string>> fields;

  const std::string* get(std::string_view key) const {
    for (const auto& [k, v] : fields)
      if (k == key) return &v;
    return nullptr;
  }
};

}  // namespace detail

// Manifest text format: records introduced by a "[sequence]" line, each
// followed by "key = value" lines. '#' starts a comment line.
//
//   [sequence]
//   label  = Soccer2
//   left   = soccer2_l.yuv      # paths relative to the manifest directory
//   right  = soccer2_r.yuv
//   depth  = soccer2_d.yuv
//   width  = 1920
//   height = 1080
//   fps    = 30
//   frames = 450
//   reference  = ...            # optional, distorted entries only
//   distortion = ...            # optional, distorted entries only
//
// check_files=false skips the existence and length checks on the data files.
inline Manifest parse_manifest(std::istream& in, const std::string& source,
                               const fs::path& base_dir,
                               bool check_files = true) {
  std::vector<detail::RawRecord> records;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    if (t == "[sequence]") {
      records.push_back({line_no, {}});
      continue;
    }
    if (records.empty())
      throw IngestError(source + ":" + std::to_string(line_no) +
                        ": field outside a [sequence] record");
    auto eq = t.find('=');
    if (eq == std::string_view::npos)
      throw IngestError(source + ":" + std::to_string(line_no) +
                        ": expected 'key = value'");
    auto value = t.substr(eq + 1);
    if (auto hash = value.find(" #"); hash != std::string_view::npos)
      value = value.substr(0, hash);
    records.back().fields.emplace_back(std::string(trim(t.substr(0, eq))),
                                       std::string(trim(value)));
  }
  if (records.empty())
    throw IngestError(source + ": manifest contains no [sequence] records");

  Manifest m;
  for (const auto& rec : records) {
    auto where = source + ":" + std::to_string(rec.line);
    auto need = [&](std::string_view key) -> const std::string& {
      const std::string* v = rec.get(key);
      if (!v || v->empty())
        throw IngestError(where + ": record missing field '" +
                          std::string(key) + "'");
      return *v;
    };
    auto positive_int = [&](std::string_view key) {
      auto v = parse_integer(need(key), where + ": field '" + std::string(key) + "'");
      if (v <= 0)
        throw IngestError(where + ": field '" + std::string(key) +
                          "' must be positive, got " + std::to_string(v));
      return static_cast<int>(v);
    };
    auto resolve = [&](std::string_view key) {
      fs::path p(need(key));
      return p.is_absolute() ? p : base_dir / p;
    };

    ManifestEntry e;
    e.label = need("label");
    e.left_path = resolve("left");
    e.right_path = resolve("right");
    e.depth_path = resolve("depth");
    e.width = positive_int("width");
    e.height = positive_int("height");
    e.frame_count = positive_int("frames");
    e.fps = parse_real(need("fps"), where + ": field 'fps'");
    if (!(e.fps > 0))
      throw IngestError(where + ": field 'fps' must be positive");
    if (const auto* r = rec.get("reference")) e.reference = *r;
    if (const auto* d = rec.get("distortion")) e.distortion = *d;
    if (e.is_distorted() && e.distortion.empty())
      throw IngestError(where + ": record has 'reference' but no 'distortion'");
    for (const auto& other : m.entries)
      if (other.label == e.label)
        throw IngestError(where + ": duplicate label '" + e.label + "'");

    if (check_files) {
      auto check = [&](const fs::path& p, std::string_view key) {
        if (!fs::exists(p))
          throw IngestError(where + ": field '" + std::string(key) +
                            "' refers to missing file '" + p.string() + "'");
      };
      check(e.left_path, "left");
      check(e.right_path, "right");
      check(e.depth_path, "depth");
    }
    m.entries.push_back(std::move(e));
  }
  return m;
}

inline Manifest load_manifest(const fs::path& path, bool check_files = true) {
  std::ifstream in(path);
  if (!in) throw IngestError("cannot open manifest '" + path.string() + "'");
  auto base = path.has_parent_path() ? path.parent_path() : fs::path(".");
  return parse_manifest(in, path.string(), base, check_files);
}

inline void write_manifest(const fs::path& path, const Manifest& m) {
  AtomicOutputFile file(path);
  auto& out = file.stream();
  auto base = path.has_parent_path() ? path.parent_path() : fs::path(".");
  auto rel = [&](const fs::path& p) {
    auto r = p.lexically_proximate(base);
    return r.empty() ? p.generic_string() : r.generic_string();
  };
  bool first = true;
  for (const auto& e : m.entries) {
    if (!first) out << '\n';
    first = false;
    out << "[sequence]\n"
        << "label = " << e.label << '\n'
        << "left = " << rel(e.left_path) << '\n'
        << "right = " << rel(e.right_path) << '\n'
        << "depth = " << rel(e.depth_path) << '\n'
        << "width = " << e.width << '\n'
        << "height = " << e.height << '\n'
        << "fps = " << format_real(e.fps) << '\n'
        << "frames = " << e.frame_count << '\n';
    if (e.is_distorted())
      out << "reference = " << e.reference << '\n'
          << "distortion = " << e.distortion << '\n';
  }
  file.commit();
}

// ---------------------------------------------------------------------------
// Stereo sequences

// Fully resident stereo sequence. Suitable for synthetic content and
// short clips; HD material should go through StereoReader instead.
struct StereoSequence {
  std::vector<Frame> left;
  std::vector<Frame> right;
  std::vector<DepthFrame> depth;
  double fps = 30.0;
  std::string label;

  int frame_count() const { return static_cast<int>(left.size()); }
  int width() const { return left.empty() ? 0 : left.front().width(); }
  int height() const { return left.empty() ? 0 : left.front().height(); }

  void validate() const {
    if (left.empty()) throw ContractError("stereo sequence '" + label + "' is empty");
    if (right.size() != left.size() || depth.size() != left.size())
      throw ContractError("stereo sequence '" + label +
                          "': left/right/depth frame counts differ");
    for (std::size_t i = 0; i < left.size(); ++i) {
      require_same_shape(left[i].y, left.front().y, "stereo sequence '" + label + "' left view");
      require_same_shape(right[i].y, left.front().y, "stereo sequence '" + label + "' right view");
      require_same_shape(depth[i].d, left.front().y, "stereo sequence '" + label + "' depth");
    }
  }

  StereoFrame frame(int i) const { return {left[i], right[i], depth[i]}; }
};

// Streams one StereoFrame at a time from the three files of a manifest entry.
class StereoReader {
 public:
  explicit StereoReader(const ManifestEntry& e)
      : label_(e.label),
        left_(e.left_path, RawLayout::yuv420, e.width, e.height, e.frame_count),
        right_(e.right_path, RawLayout::yuv420, e.width, e.height, e.frame_count),
        depth_(e.depth_path, RawLayout::gray8, e.width, e.height, e.frame_count) {}

  int frame_count() const { return left_.frame_count(); }
  const std::string& label() const { return label_; }

  std::optional<StereoFrame> next() {
    auto l = left_.next_frame();
    if (!l) return std::nullopt;
    auto r = right_.next_frame();
    auto d = depth_.next_depth();
    return StereoFrame{std::move(*l), std::move(*r), std::move(*d)};
  }

 private:
  std::string label_;
  RawVideoReader left_;
  RawVideoReader right_;
  RawVideoReader depth_;
};

// Cursor over a resident sequence with the same interface as StereoReader.
class SequenceCursor {
 public:
  explicit SequenceCursor(const StereoSequence& s) : seq_(&s) { s.validate(); }

  int frame_count() const { return seq_->frame_count(); }
  const std::string& label() const { return seq_->label; }

  std::optional<StereoFrame> next() {
    if (index_ >= seq_->frame_count()) return std::nullopt;
    return seq_->frame(index_++);
  }

 private:
  const StereoSequence* seq_;
  int index_ = 0;
};

inline StereoSequence load_sequence(const ManifestEntry& e) {
  StereoSequence s;
  s.label = e.label;
  s.fps = e.fps;
  s.left = read_yuv420_sequence(e.left_path, e.width, e.height, e.frame_count);
  s.right = read_yuv420_sequence(e.right_path, e.width, e.height, e.frame_count);
  s.depth = read_depth_sequence(e.depth_path, e.width, e.height, e.frame_count);
  return s;
}

}  // namespace hv3d
