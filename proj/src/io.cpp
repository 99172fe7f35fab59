// Copyright 2026 The lidarsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "lidarsim/io.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <iterator>
#include <limits>
#include <set>

namespace lidarsim {

namespace {

constexpr std::uint32_t kVersion = 1;
constexpr std::uint32_t kDtypeFloat32 = 1;
constexpr std::uint32_t kMaxRank = 16;

void put_u32(Bytes& out, std::uint32_t v) {
  for (int k = 0; k < 4; ++k) out.push_back(static_cast<std::uint8_t>((v >> (8 * k)) & 0xffu));
}

void put_f32(Bytes& out, float f) { put_u32(out, std::bit_cast<std::uint32_t>(f)); }

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::size_t position() const { return pos_; }
  std::size_t remaining() const { return bytes_.size() - pos_; }

  void need(std::size_t n, const char* what) const {
    if (remaining() < n) {
      throw FormatError(FormatError::Kind::kTruncated,
                        fmt::format("truncated {}: need {} bytes at offset {}, have {}", what, n,
                                    pos_, remaining()));
    }
  }

  std::uint32_t u32(const char* what) {
    need(4, what);
    std::uint32_t v = 0;
    for (int k = 0; k < 4; ++k) v |= static_cast<std::uint32_t>(bytes_[pos_ + k]) << (8 * k);
    pos_ += 4;
    return v;
  }

  float f32(const char* what) { return std::bit_cast<float>(u32(what)); }

  std::string text(std::size_t n, const char* what) {
    need(n, what);
    std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
    pos_ += n;
    return s;
  }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

void expect_magic(Reader& r, std::string_view magic, const char* what) {
  const std::string got = r.text(4, what);
  if (got != magic) {
    throw FormatError(FormatError::Kind::kBadMagic,
                      fmt::format("bad {} magic (expected {})", what, magic));
  }
}

void expect_version(Reader& r, const char* what) {
  const auto v = r.u32(what);
  if (v != kVersion) {
    throw FormatError(FormatError::Kind::kBadVersion,
                      fmt::format("unsupported {} version {}", what, v));
  }
}

Tensor decode_tensor_record(Reader& r) {
  expect_magic(r, "RTNS", "tensor");
  expect_version(r, "tensor");
  const auto dtype = r.u32("tensor dtype");
  if (dtype != kDtypeFloat32) {
    throw FormatError(FormatError::Kind::kBadDtype, fmt::format("unsupported dtype {}", dtype));
  }
  const auto rank = r.u32("tensor rank");
  if (rank > kMaxRank) {
    throw FormatError(FormatError::Kind::kDimensionOverflow, fmt::format("rank {} too large", rank));
  }
  Tensor t;
  std::uint64_t count = 1;
  for (std::uint32_t k = 0; k < rank; ++k) {
    const auto d = r.u32("tensor dims");
    if (d != 0 && count > std::numeric_limits<std::uint64_t>::max() / 4 / d) {
      throw FormatError(FormatError::Kind::kDimensionOverflow, "tensor element count overflows");
    }
    count *= d;
    t.dims.push_back(d);
  }
  if (count > r.remaining() / 4) {
    r.need(static_cast<std::size_t>(std::min<std::uint64_t>(count * 4, std::numeric_limits<std::size_t>::max())),
           "tensor payload");
  }
  t.data.resize(static_cast<std::size_t>(count));
  for (auto& v : t.data) v = r.f32("tensor payload");
  return t;
}

std::size_t checked_count(const std::vector<std::uint32_t>& dims) {
  std::uint64_t count = 1;
  for (auto d : dims) count *= d;
  return static_cast<std::size_t>(count);
}

}  // namespace

std::size_t Tensor::element_count() const { return checked_count(dims); }

Bytes encode_tensor(const Tensor& t) {
  if (t.dims.size() > kMaxRank) {
    throw FormatError(FormatError::Kind::kDimensionOverflow, "tensor rank too large");
  }
  if (t.element_count() != t.data.size()) {
    throw FormatError(FormatError::Kind::kShapeMismatch,
                      fmt::format("tensor has {} values for {} elements", t.data.size(),
                                  t.element_count()));
  }
  Bytes out{'R', 'T', 'N', 'S'};
  out.reserve(16 + 4 * t.dims.size() + 4 * t.data.size());
  put_u32(out, kVersion);
  put_u32(out, kDtypeFloat32);
  put_u32(out, static_cast<std::uint32_t>(t.dims.size()));
  for (auto d : t.dims) put_u32(out, d);
  for (float v : t.data) put_f32(out, v);
  return out;
}

Tensor decode_tensor(std::span<const std::uint8_t> bytes, std::size_t* consumed) {
  Reader r(bytes);
  Tensor t = decode_tensor_record(r);
  if (consumed) {
    *consumed = r.position();
  } else if (r.remaining() != 0) {
    throw FormatError(FormatError::Kind::kTrailingBytes,
                      fmt::format("{} trailing bytes after tensor", r.remaining()));
  }
  return t;
}

Bytes encode_weights(const NamedTensors& tensors) {
  std::set<std::string> seen;
  Bytes out{'R', 'T', 'N', 'W'};
  put_u32(out, kVersion);
  put_u32(out, static_cast<std::uint32_t>(tensors.size()));
  for (const auto& [name, tensor] : tensors) {
    if (!seen.insert(name).second) {
      throw FormatError(FormatError::Kind::kDuplicateName,
                        fmt::format("duplicate tensor name '{}'", name));
    }
    put_u32(out, static_cast<std::uint32_t>(name.size()));
    out.insert(out.end(), name.begin(), name.end());
    const Bytes record = encode_tensor(tensor);
    out.insert(out.end(), record.begin(), record.end());
  }
  return out;
}

NamedTensors decode_weights(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  expect_magic(r, "RTNW", "weights");
  expect_version(r, "weights");
  const auto count = r.u32("weights count");
  NamedTensors out;
  std::set<std::string> seen;
  for (std::uint32_t k = 0; k < count; ++k) {
    const auto len = r.u32("tensor name length");
    std::string name = r.text(len, "tensor name");
    if (!seen.insert(name).second) {
      throw FormatError(FormatError::Kind::kDuplicateName,
                        fmt::format("duplicate tensor name '{}'", name));
    }
    std::size_t used = 0;
    Tensor t = decode_tensor(bytes.subspan(r.position()), &used);
    r.text(used, "tensor record");
    out.emplace_back(std::move(name), std::move(t));
  }
  if (r.remaining() != 0) {
    throw FormatError(FormatError::Kind::kTrailingBytes,
                      fmt::format("{} trailing bytes after weights", r.remaining()));
  }
  return out;
}

Bytes encode_cloud(const PointCloud& pc) {
  Bytes out;
  out.reserve(16 * pc.size());
  for (const auto& p : pc.points) {
    put_f32(out, static_cast<float>(p.x));
    put_f32(out, static_cast<float>(p.y));
    put_f32(out, static_cast<float>(p.z));
    put_f32(out, static_cast<float>(p.intensity));
  }
  return out;
}

PointCloud decode_cloud(std::span<const std::uint8_t> bytes) {
  if (bytes.size() % 16 != 0) {
    throw FormatError(FormatError::Kind::kTruncated,
                      fmt::format("cloud length {} is not a multiple of 16 bytes", bytes.size()));
  }
  Reader r(bytes);
  PointCloud pc;
  pc.points.resize(bytes.size() / 16);
  for (auto& p : pc.points) {
    p.x = r.f32("cloud");
    p.y = r.f32("cloud");
    p.z = r.f32("cloud");
    p.intensity = r.f32("cloud");
  }
  return pc;
}

Bytes read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(FormatError::Kind::kIo, fmt::format("cannot open {}", path.string()));
  return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError(FormatError::Kind::kIo, fmt::format("cannot write {}", path.string()));
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw FormatError(FormatError::Kind::kIo, fmt::format("write failed: {}", path.string()));
}

Tensor read_tensor(const std::filesystem::path& path) { return decode_tensor(read_bytes(path)); }
void write_tensor(const std::filesystem::path& path, const Tensor& t) {
  write_bytes(path, encode_tensor(t));
}
PointCloud read_cloud(const std::filesystem::path& path) { return decode_cloud(read_bytes(path)); }
void write_cloud(const std::filesystem::path& path, const PointCloud& pc) {
  write_bytes(path, encode_cloud(pc));
}

NamedTensors model_to_tensors(const RinetLite& model) {
  NamedTensors out;
  out.emplace_back("cfg.C", Tensor{{}, {static_cast<float>(model.config().channels)}});
  out.emplace_back("cfg.N", Tensor{{}, {static_cast<float>(model.config().blocks)}});
  for (const auto& spec : model.layout()) {
    Tensor t;
    for (auto d : spec.shape) t.dims.push_back(static_cast<std::uint32_t>(d));
    const auto values = model.parameters(spec.name);
    t.data.assign(values.begin(), values.end());
    out.emplace_back(spec.name, std::move(t));
  }
  return out;
}

RinetLite model_from_tensors(const NamedTensors& tensors) {
  auto find = [&](const std::string& name) -> const Tensor& {
    for (const auto& [n, t] : tensors) {
      if (n == name) return t;
    }
    throw FormatError(FormatError::Kind::kShapeMismatch,
                      fmt::format("weights are missing tensor '{}'", name));
  };
  auto scalar = [&](const std::string& name) {
    const Tensor& t = find(name);
    if (t.data.size() != 1 || t.data[0] < 0.0f || t.data[0] != std::floor(t.data[0])) {
      throw FormatError(FormatError::Kind::kShapeMismatch, fmt::format("bad '{}'", name));
    }
    return static_cast<int>(t.data[0]);
  };

  RinetLite model(RinetConfig{scalar("cfg.C"), scalar("cfg.N")});
  if (tensors.size() != model.layout().size() + 2) {
    throw FormatError(FormatError::Kind::kShapeMismatch,
                      fmt::format("expected {} tensors, found {}", model.layout().size() + 2,
                                  tensors.size()));
  }
  for (const auto& spec : model.layout()) {
    const Tensor& t = find(spec.name);
    std::vector<std::uint32_t> expected(spec.shape.begin(), spec.shape.end());
    if (t.dims != expected || t.data.size() != spec.size) {
      throw FormatError(FormatError::Kind::kShapeMismatch,
                        fmt::format("tensor '{}' does not match the declared configuration",
                                    spec.name));
    }
    auto dst = model.parameters(spec.name);
    std::copy(t.data.begin(), t.data.end(), dst.begin());
  }
  return model;
}

void write_weights(const std::filesystem::path& path, const RinetLite& model) {
  write_bytes(path, encode_weights(model_to_tensors(model)));
}

RinetLite read_weights(const std::filesystem::path& path) {
  return model_from_tensors(decode_weights(read_bytes(path)));
}

namespace {

Tensor planes_to_tensor(std::initializer_list<const GridD*> planes) {
  const GridD& first = **planes.begin();
  Tensor t;
  t.dims = {static_cast<std::uint32_t>(planes.size()), static_cast<std::uint32_t>(first.rows()),
            static_cast<std::uint32_t>(first.cols())};
  t.data.reserve(planes.size() * first.size());
  for (const GridD* g : planes) {
    for (double v : g->data()) t.data.push_back(static_cast<float>(v));
  }
  return t;
}

void expect_planes(const Tensor& t, std::uint32_t channels, const char* what) {
  if (t.dims.size() != 3 || t.dims[0] != channels || t.data.size() != t.element_count()) {
    throw FormatError(FormatError::Kind::kShapeMismatch,
                      fmt::format("{} tensor must have shape [{}, H, W]", what, channels));
  }
}

GridD plane(const Tensor& t, std::size_t k) {
  const std::size_t h = t.dims[t.dims.size() - 2];
  const std::size_t w = t.dims[t.dims.size() - 1];
  GridD g(h, w);
  for (std::size_t i = 0; i < h * w; ++i) g.data()[i] = t.data[k * h * w + i];
  return g;
}

}  // namespace

Tensor to_tensor(const RangeImage& ri) { return planes_to_tensor({&ri.depth, &ri.intensity}); }
Tensor to_tensor(const AppearanceImage& img) {
  return planes_to_tensor({&img.channels[0], &img.channels[1], &img.channels[2]});
}
Tensor to_tensor(const DenseIntensityMask& mask) {
  return planes_to_tensor({&mask.value, &mask.depth});
}
Tensor to_tensor(const PredictorOutput& pred) {
  return planes_to_tensor({&pred.raydrop, &pred.intensity});
}
Tensor to_tensor(const GridD& grid) {
  Tensor t;
  t.dims = {static_cast<std::uint32_t>(grid.rows()), static_cast<std::uint32_t>(grid.cols())};
  for (double v : grid.data()) t.data.push_back(static_cast<float>(v));
  return t;
}

RangeImage range_image_from_tensor(const Tensor& t) {
  expect_planes(t, 2, "range image");
  RangeImage ri;
  ri.depth = plane(t, 0);
  ri.intensity = plane(t, 1);
  return ri;
}

AppearanceImage appearance_from_tensor(const Tensor& t) {
  expect_planes(t, 3, "appearance");
  AppearanceImage img;
  for (std::size_t k = 0; k < 3; ++k) img.channels[k] = plane(t, k);
  return img;
}

DenseIntensityMask mask_from_tensor(const Tensor& t) {
  expect_planes(t, 2, "dense mask");
  DenseIntensityMask m;
  m.value = plane(t, 0);
  m.depth = plane(t, 1);
  return m;
}

PredictorOutput prediction_from_tensor(const Tensor& t) {
  expect_planes(t, 2, "prediction");
  return PredictorOutput(plane(t, 0), plane(t, 1));
}

GridD grid_from_tensor(const Tensor& t, std::size_t channel) {
  if (t.dims.size() == 2 && channel == 0) return plane(t, 0);
  if (t.dims.size() == 3 && channel < t.dims[0]) return plane(t, channel);
  throw FormatError(FormatError::Kind::kShapeMismatch,
                    fmt::format("tensor of rank {} has no channel {}", t.dims.size(), channel));
}

Bytes encode_pgm(const GridD& grid) {
  const std::string header = fmt::format("P5\n{} {}\n255\n", grid.cols(), grid.rows());
  Bytes out(header.begin(), header.end());
  for (double v : grid.data()) {
    const double x = std::isfinite(v) ? std::clamp(v, 0.0, 1.0) : 0.0;
    out.push_back(static_cast<std::uint8_t>(std::lround(255.0 * x)));
  }
  return out;
}

void write_pgm(const GridD& grid, const std::filesystem::path& path) {
  write_bytes(path, encode_pgm(grid));
}

// ---------------------------------------------------------------------------
// Text formats

const ConfigSchema& scene_schema() {
  static const ConfigSchema schema{
      {"scene.ground", {ValueType::kString}},
      {"scene.sensor_origin", {ValueType::kTriple}},
      {"material.name", {ValueType::kString}},
      {"material.color", {ValueType::kTriple, 0.0, 1.0}},
      {"material.rho", {ValueType::kNumber, 0.0, 1.0}},
      {"material.transparent", {ValueType::kBool}},
      {"box.min", {ValueType::kTriple}},
      {"box.max", {ValueType::kTriple}},
      {"box.material", {ValueType::kString}},
  };
  return schema;
}

Scene parse_scene(std::string_view text) {
  const Config cfg = parse_config(text, &scene_schema());
  Scene scene;
  for (const auto* s : cfg.sections_named("material")) {
    Material m{section_string(*s, "name"), section_triple(*s, "color"), section_number(*s, "rho"),
               section_bool_or(*s, "transparent", false)};
    for (const auto& existing : scene.materials) {
      if (existing.name == m.name) {
        throw ConfigError(ConfigError::Kind::kDuplicateKey, s->line,
                          fmt::format("material '{}' defined twice", m.name));
      }
    }
    scene.materials.push_back(std::move(m));
  }
  auto material_index = [&](const std::string& name, int line) {
    for (std::size_t k = 0; k < scene.materials.size(); ++k) {
      if (scene.materials[k].name == name) return k;
    }
    throw ConfigError(ConfigError::Kind::kMissing, line,
                      fmt::format("unknown material '{}'", name));
  };

  const std::string ground = cfg.string_or("scene.ground", "none");
  if (ground != "none") scene.ground = material_index(ground, 0);
  if (cfg.has("scene.sensor_origin")) scene.sensor_origin = cfg.triple("scene.sensor_origin");

  for (const auto* s : cfg.sections_named("box")) {
    scene.boxes.push_back({section_triple(*s, "min"), section_triple(*s, "max"),
                           material_index(section_string(*s, "material"), s->line)});
  }
  scene.validate();
  return scene;
}

namespace {

std::string triple_text(const Vec3& v) { return fmt::format("{}, {}, {}", v.x, v.y, v.z); }

}  // namespace

std::string format_scene(const Scene& scene) {
  std::string out = "[scene]\n";
  out += fmt::format("ground = {}\n", scene.ground ? scene.materials[*scene.ground].name : "none");
  out += fmt::format("sensor_origin = {}\n", triple_text(scene.sensor_origin));
  for (const auto& m : scene.materials) {
    out += fmt::format("\n[material]\nname = {}\ncolor = {}\nrho = {}\ntransparent = {}\n", m.name,
                       triple_text(m.color), m.reflectance, m.transparent ? "true" : "false");
  }
  for (const auto& b : scene.boxes) {
    out += fmt::format("\n[box]\nmin = {}\nmax = {}\nmaterial = {}\n", triple_text(b.min),
                       triple_text(b.max), scene.materials[b.material].name);
  }
  return out;
}

const ConfigSchema& rig_schema() {
  static const ConfigSchema schema{
      {"sensor.preset", {ValueType::kString}},
      {"sensor.name", {ValueType::kString}},
      {"sensor.rows", {ValueType::kNumber, 1.0, std::nullopt}},
      {"sensor.cols", {ValueType::kNumber, 1.0, std::nullopt}},
      {"sensor.elev_min_deg", {ValueType::kNumber, -90.0, 90.0}},
      {"sensor.elev_max_deg", {ValueType::kNumber, -90.0, 90.0}},
      {"sensor.az_min_deg", {ValueType::kNumber}},
      {"sensor.az_max_deg", {ValueType::kNumber}},
      {"sensor.max_range", {ValueType::kNumber, 0.0, std::nullopt}},
      {"camera.width", {ValueType::kNumber, 1.0, std::nullopt}},
      {"camera.height", {ValueType::kNumber, 1.0, std::nullopt}},
      {"camera.fx", {ValueType::kNumber, 0.0, std::nullopt}},
      {"camera.fy", {ValueType::kNumber, 0.0, std::nullopt}},
      {"camera.cx", {ValueType::kNumber}},
      {"camera.cy", {ValueType::kNumber}},
      {"camera.translation", {ValueType::kTriple}},
  };
  return schema;
}

namespace {

int as_int(double v, const char* what) {
  if (v != std::floor(v)) throw InvalidArgument(fmt::format("{} must be an integer", what));
  return static_cast<int>(v);
}

}  // namespace

Rig parse_rig(std::string_view text) {
  const Config cfg = parse_config(text, &rig_schema());
  Rig rig;
  if (cfg.has("sensor.preset")) {
    rig.sensor = sensor_preset(cfg.string("sensor.preset"));
  } else {
    rig.sensor = SensorConfig(cfg.string_or("sensor.name", "custom"),
                              as_int(cfg.number("sensor.rows"), "sensor.rows"),
                              as_int(cfg.number("sensor.cols"), "sensor.cols"),
                              deg2rad(cfg.number("sensor.elev_min_deg")),
                              deg2rad(cfg.number("sensor.elev_max_deg")),
                              deg2rad(cfg.number("sensor.az_min_deg")),
                              deg2rad(cfg.number("sensor.az_max_deg")),
                              cfg.number("sensor.max_range"));
  }
  const int width = as_int(cfg.number_or("camera.width", 512), "camera.width");
  const int height = as_int(cfg.number_or("camera.height", 256), "camera.height");
  RigidTransform extrinsic = forward_looking_extrinsic();
  if (cfg.has("camera.translation")) extrinsic.translation = cfg.triple("camera.translation");
  rig.camera = CameraModel(width, height, cfg.number_or("camera.fx", 256.0),
                           cfg.number_or("camera.fy", 256.0),
                           cfg.number_or("camera.cx", 0.5 * (width - 1)),
                           cfg.number_or("camera.cy", 0.5 * (height - 1)), extrinsic);
  return rig;
}

std::string format_rig(const Rig& rig) {
  const auto& s = rig.sensor;
  const auto& c = rig.camera;
  return fmt::format(
      "[sensor]\nname = {}\nrows = {}\ncols = {}\nelev_min_deg = {}\nelev_max_deg = {}\n"
      "az_min_deg = {}\naz_max_deg = {}\nmax_range = {}\n\n"
      "[camera]\nwidth = {}\nheight = {}\nfx = {}\nfy = {}\ncx = {}\ncy = {}\ntranslation = {}\n",
      s.name, s.rows, s.cols, rad2deg(s.elev_min), rad2deg(s.elev_max), rad2deg(s.az_min),
      rad2deg(s.az_max), s.max_range, c.width, c.height, c.fx, c.fy, c.cx, c.cy,
      triple_text(c.extrinsic.translation));
}

Rig desk_rig() {
  return Rig{SensorConfig("desk32", 32, 64, deg2rad(-18.0), deg2rad(18.0), deg2rad(-45.0),
                          deg2rad(45.0), 40.0),
             CameraModel::centered(128, 64, 128.0)};
}

std::string read_text(const std::filesystem::path& path) {
  const Bytes b = read_bytes(path);
  return std::string(b.begin(), b.end());
}

void write_text(const std::filesystem::path& path, std::string_view text) {
  write_bytes(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

}  // namespace lidarsim
