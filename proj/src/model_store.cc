// Copyright 2026 The URLSentinel Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "urlsentinel/model_store.h"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include <zlib.h>

#include "urlsentinel/errors.h"

namespace urlsentinel {
namespace {

constexpr std::size_t kHeaderSize = 24;
constexpr std::size_t kCrcSize = 4;
constexpr std::uint32_t kFlagFloat32 = 1u;

constexpr std::uint32_t Tag(const char (&s)[5]) {
  return static_cast<std::uint32_t>(static_cast<unsigned char>(s[0])) |
         static_cast<std::uint32_t>(static_cast<unsigned char>(s[1])) << 8 |
         static_cast<std::uint32_t>(static_cast<unsigned char>(s[2])) << 16 |
         static_cast<std::uint32_t>(static_cast<unsigned char>(s[3])) << 24;
}

constexpr std::uint32_t kTagVectorizer = Tag("VECT");
constexpr std::uint32_t kTagScaler = Tag("SCAL");
constexpr std::uint32_t kTagNetwork = Tag("MLPN");
constexpr std::uint32_t kTagForest = Tag("IFOR");
constexpr std::uint32_t kTagMetadata = Tag("META");

class Writer {
 public:
  void U8(std::uint8_t v) { bytes_.push_back(v); }
  void U32(std::uint32_t v) { Le(v, 4); }
  void U64(std::uint64_t v) { Le(v, 8); }
  void I32(std::int32_t v) { U32(static_cast<std::uint32_t>(v)); }
  void F64(double v) { U64(std::bit_cast<std::uint64_t>(v)); }
  void F32(float v) { U32(std::bit_cast<std::uint32_t>(v)); }
  void Str(const std::string& s) {
    U32(static_cast<std::uint32_t>(s.size()));
    bytes_.insert(bytes_.end(), s.begin(), s.end());
  }
  void Raw(std::span<const std::uint8_t> b) {
    bytes_.insert(bytes_.end(), b.begin(), b.end());
  }
  void Section(std::uint32_t tag, const Writer& payload) {
    U32(tag);
    U64(payload.bytes_.size());
    Raw(payload.bytes_);
  }
  void PatchU64(std::size_t offset, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      bytes_[offset + static_cast<std::size_t>(i)] =
          static_cast<std::uint8_t>(v >> (8 * i));
    }
  }
  std::vector<std::uint8_t>& bytes() { return bytes_; }

 private:
  void Le(std::uint64_t v, int width) {
    for (int i = 0; i < width; ++i) {
      bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
  }
  std::vector<std::uint8_t> bytes_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::size_t remaining() const { return bytes_.size() - pos_; }
  bool done() const { return pos_ == bytes_.size(); }

  void Need(std::size_t n) const {
    if (remaining() < n) {
      throw Error(ErrorCode::kFormat, "model bundle section is too short");
    }
  }
  std::uint8_t U8() {
    Need(1);
    return bytes_[pos_++];
  }
  std::uint32_t U32() { return static_cast<std::uint32_t>(Le(4)); }
  std::uint64_t U64() { return Le(8); }
  std::int32_t I32() { return static_cast<std::int32_t>(U32()); }
  double F64() { return std::bit_cast<double>(U64()); }
  float F32() { return std::bit_cast<float>(U32()); }
  std::string Str() {
    const auto n = U32();
    Need(n);
    std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  std::span<const std::uint8_t> Take(std::size_t n) {
    Need(n);
    auto s = bytes_.subspan(pos_, n);
    pos_ += n;
    return s;
  }

 private:
  std::uint64_t Le(int width) {
    Need(static_cast<std::size_t>(width));
    std::uint64_t v = 0;
    for (int i = 0; i < width; ++i) {
      v |= static_cast<std::uint64_t>(bytes_[pos_++]) << (8 * i);
    }
    return v;
  }
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

std::uint32_t ReadU32At(std::span<const std::uint8_t> b, std::size_t off) {
  std::uint32_t v = 0;
  for (std::size_t i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[off + i]) << (8 * i);
  return v;
}

std::uint64_t ReadU64At(std::span<const std::uint8_t> b, std::size_t off) {
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[off + i]) << (8 * i);
  return v;
}

Writer EncodeVectorizer(const VectorizerConfig& v) {
  Writer w;
  w.I32(v.ngram_min);
  w.I32(v.ngram_max);
  w.U64(v.n_features);
  w.U8(v.l2_normalize ? 1 : 0);
  w.U8(v.signed_hash ? 1 : 0);
  w.U64(v.max_len);
  return w;
}

VectorizerConfig DecodeVectorizer(Reader& r) {
  VectorizerConfig v;
  v.ngram_min = r.I32();
  v.ngram_max = r.I32();
  v.n_features = r.U64();
  v.l2_normalize = r.U8() != 0;
  v.signed_hash = r.U8() != 0;
  v.max_len = r.U64();
  return v;
}

Writer EncodeScaler(const FeatureScaler& s) {
  Writer w;
  for (const double m : s.mean) w.F64(m);
  for (const double d : s.std) w.F64(d);
  return w;
}

FeatureScaler DecodeScaler(Reader& r) {
  FeatureScaler s;
  for (double& m : s.mean) m = r.F64();
  for (double& d : s.std) d = r.F64();
  return s;
}

Writer EncodeNetwork(const MlpModel& m, ParameterEncoding encoding) {
  Writer w;
  w.U32(static_cast<std::uint32_t>(m.layer_count()));
  for (const auto d : m.layer_dims) w.U64(d);
  for (const auto a : m.activations) w.U8(static_cast<std::uint8_t>(a));
  auto put = [&](double v) {
    if (encoding == ParameterEncoding::kFloat32) {
      w.F32(static_cast<float>(v));
    } else {
      w.F64(v);
    }
  };
  for (std::size_t l = 0; l < m.layer_count(); ++l) {
    const auto& wt = m.weights[l];
    for (Eigen::Index r = 0; r < wt.rows(); ++r) {
      for (Eigen::Index c = 0; c < wt.cols(); ++c) put(wt(r, c));
    }
    for (Eigen::Index i = 0; i < m.biases[l].size(); ++i) put(m.biases[l][i]);
  }
  return w;
}

MlpModel DecodeNetwork(Reader& r, ParameterEncoding encoding) {
  const auto layers = r.U32();
  r.Need((static_cast<std::size_t>(layers) + 1) * 8 + layers);
  MlpModel m;
  for (std::uint32_t i = 0; i <= layers; ++i) m.layer_dims.push_back(r.U64());
  for (std::uint32_t i = 0; i < layers; ++i) {
    const auto a = r.U8();
    if (a > static_cast<std::uint8_t>(Activation::kSigmoid)) {
      throw Error(ErrorCode::kFormat, "unknown activation code");
    }
    m.activations.push_back(static_cast<Activation>(a));
  }
  const std::size_t width = encoding == ParameterEncoding::kFloat32 ? 4 : 8;
  auto get = [&]() {
    return encoding == ParameterEncoding::kFloat32 ? static_cast<double>(r.F32())
                                                   : r.F64();
  };
  for (std::uint32_t l = 0; l < layers; ++l) {
    const auto in = m.layer_dims[l];
    const auto out = m.layer_dims[l + 1];
    if (in == 0 || out == 0 || in > r.remaining() || out > r.remaining() ||
        (in + 1) * out > r.remaining() / width) {
      throw Error(ErrorCode::kFormat, "network layer exceeds section size");
    }
    Eigen::MatrixXd wt(static_cast<Eigen::Index>(in), static_cast<Eigen::Index>(out));
    for (Eigen::Index rr = 0; rr < wt.rows(); ++rr) {
      for (Eigen::Index c = 0; c < wt.cols(); ++c) wt(rr, c) = get();
    }
    Eigen::VectorXd b(static_cast<Eigen::Index>(out));
    for (Eigen::Index i = 0; i < b.size(); ++i) b[i] = get();
    m.weights.push_back(std::move(wt));
    m.biases.push_back(std::move(b));
  }
  return m;
}

Writer EncodeForest(const IsolationForestModel& f) {
  Writer w;
  w.U64(f.input_dim);
  w.U64(f.psi);
  w.U64(f.subsample_size);
  w.U64(f.seed);
  w.U32(static_cast<std::uint32_t>(f.trees.size()));
  for (const auto& t : f.trees) {
    w.U64(t.input_dim);
    w.U32(static_cast<std::uint32_t>(t.nodes.size()));
    for (const auto& n : t.nodes) {
      w.I32(n.feature);
      w.F64(n.split_value);
      w.I32(n.left);
      w.I32(n.right);
      w.U64(n.size);
    }
  }
  return w;
}

IsolationForestModel DecodeForest(Reader& r) {
  constexpr std::size_t kNodeBytes = 4 + 8 + 4 + 4 + 8;
  IsolationForestModel f;
  f.input_dim = r.U64();
  f.psi = r.U64();
  f.subsample_size = r.U64();
  f.seed = r.U64();
  const auto trees = r.U32();
  for (std::uint32_t t = 0; t < trees; ++t) {
    IsoTree tree;
    tree.input_dim = r.U64();
    const auto count = r.U32();
    if (count == 0 || count > r.remaining() / kNodeBytes) {
      throw Error(ErrorCode::kFormat, "isolation tree exceeds section size");
    }
    tree.nodes.resize(count);
    for (auto& n : tree.nodes) {
      n.feature = r.I32();
      n.split_value = r.F64();
      n.left = r.I32();
      n.right = r.I32();
      n.size = r.U64();
      if (!n.is_leaf() &&
          (static_cast<std::size_t>(n.feature) >= tree.input_dim || n.left <= 0 ||
           n.right <= 0 || static_cast<std::uint32_t>(n.left) >= count ||
           static_cast<std::uint32_t>(n.right) >= count)) {
        throw Error(ErrorCode::kFormat, "isolation tree node out of range");
      }
    }
    f.trees.push_back(std::move(tree));
  }
  return f;
}

Writer EncodeMetadata(const BundleMetadata& m) {
  Writer w;
  w.Str(m.created_at);
  w.Str(m.corpus_description);
  w.U32(static_cast<std::uint32_t>(m.metrics.size()));
  for (const auto& [key, value] : m.metrics) {
    w.Str(key);
    w.F64(value);
  }
  return w;
}

BundleMetadata DecodeMetadata(Reader& r) {
  BundleMetadata m;
  m.created_at = r.Str();
  m.corpus_description = r.Str();
  const auto n = r.U32();
  for (std::uint32_t i = 0; i < n; ++i) {
    auto key = r.Str();
    m.metrics.emplace_back(std::move(key), r.F64());
  }
  return m;
}

}  // namespace

std::uint32_t crc32(std::span<const std::uint8_t> bytes) {
  uLong crc = ::crc32(0L, Z_NULL, 0);
  // zlib takes a uInt length; feed large buffers in chunks.
  constexpr std::size_t kChunk = 1u << 30;
  for (std::size_t off = 0; off < bytes.size(); off += kChunk) {
    const auto n = std::min(kChunk, bytes.size() - off);
    crc = ::crc32(crc, bytes.data() + off, static_cast<uInt>(n));
  }
  return static_cast<std::uint32_t>(crc);
}

void ModelBundle::validate() const {
  if (format_version != kBundleFormatVersion) {
    throw Error(ErrorCode::kUnsupportedVersion,
                "unsupported bundle format version " +
                    std::to_string(format_version));
  }
  vectorizer.validate();
  network.validate();
  if (network.input_dim() != feature_dim(vectorizer)) {
    throw Error(ErrorCode::kInvalidArgument,
                "network input width must equal n_features + 4");
  }
  for (const double s : scaler.std) {
    if (!(s > 0.0)) {
      throw Error(ErrorCode::kInvalidArgument, "scaler std must be positive");
    }
  }
  if (forest && forest->input_dim != feature_dim(vectorizer)) {
    throw Error(ErrorCode::kInvalidArgument,
                "isolation forest dimension does not match the features");
  }
}

std::vector<std::uint8_t> serialize_bundle(const ModelBundle& bundle,
                                           ParameterEncoding encoding) {
  bundle.validate();
  Writer w;
  for (const char c : kBundleMagic) w.U8(static_cast<std::uint8_t>(c));
  w.U32(bundle.format_version);
  w.U32(encoding == ParameterEncoding::kFloat32 ? kFlagFloat32 : 0u);
  w.U64(0);  // total length, patched below
  w.Section(kTagVectorizer, EncodeVectorizer(bundle.vectorizer));
  w.Section(kTagScaler, EncodeScaler(bundle.scaler));
  w.Section(kTagNetwork, EncodeNetwork(bundle.network, encoding));
  if (bundle.forest) w.Section(kTagForest, EncodeForest(*bundle.forest));
  w.Section(kTagMetadata, EncodeMetadata(bundle.metadata));
  w.PatchU64(16, w.bytes().size() + kCrcSize);
  w.U32(crc32(w.bytes()));
  return std::move(w.bytes());
}

ModelBundle deserialize_bundle(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < sizeof(kBundleMagic) ||
      !std::equal(std::begin(kBundleMagic), std::end(kBundleMagic), bytes.begin(),
                  [](char a, std::uint8_t b) {
                    return static_cast<std::uint8_t>(a) == b;
                  })) {
    throw Error(ErrorCode::kMagicMismatch, "not a model bundle (bad magic)");
  }
  if (bytes.size() < 12) {
    throw Error(ErrorCode::kTruncated, "model bundle header is truncated");
  }
  const auto version = ReadU32At(bytes, 8);
  if (version != kBundleFormatVersion) {
    throw Error(ErrorCode::kUnsupportedVersion,
                "unsupported bundle format version " + std::to_string(version));
  }
  if (bytes.size() < kHeaderSize + kCrcSize) {
    throw Error(ErrorCode::kTruncated, "model bundle header is truncated");
  }
  const auto total = ReadU64At(bytes, 16);
  if (bytes.size() < total) {
    throw Error(ErrorCode::kTruncated,
                "model bundle is truncated: " + std::to_string(bytes.size()) +
                    " of " + std::to_string(total) + " bytes");
  }
  if (bytes.size() > total || total < kHeaderSize + kCrcSize) {
    throw Error(ErrorCode::kFormat, "model bundle length field is inconsistent");
  }
  const auto body = bytes.first(bytes.size() - kCrcSize);
  if (crc32(body) != ReadU32At(bytes, bytes.size() - kCrcSize)) {
    throw Error(ErrorCode::kChecksum, "model bundle CRC-32 mismatch");
  }
  const auto flags = ReadU32At(bytes, 12);
  if (flags & ~kFlagFloat32) {
    throw Error(ErrorCode::kFormat, "unknown model bundle flags");
  }
  const auto encoding = (flags & kFlagFloat32) ? ParameterEncoding::kFloat32
                                               : ParameterEncoding::kFloat64;

  ModelBundle b;
  b.format_version = version;
  bool seen_vect = false, seen_scal = false, seen_net = false, seen_meta = false;
  Reader sections(body.subspan(kHeaderSize));
  while (!sections.done()) {
    const auto tag = sections.U32();
    const auto length = sections.U64();
    if (length > sections.remaining()) {
      throw Error(ErrorCode::kFormat, "section length exceeds bundle size");
    }
    Reader r(sections.Take(static_cast<std::size_t>(length)));
    auto once = [](bool& seen) {
      if (seen) throw Error(ErrorCode::kFormat, "duplicate bundle section");
      seen = true;
    };
    if (tag == kTagVectorizer) {
      once(seen_vect);
      b.vectorizer = DecodeVectorizer(r);
    } else if (tag == kTagScaler) {
      once(seen_scal);
      b.scaler = DecodeScaler(r);
    } else if (tag == kTagNetwork) {
      once(seen_net);
      b.network = DecodeNetwork(r, encoding);
    } else if (tag == kTagForest) {
      if (b.forest) throw Error(ErrorCode::kFormat, "duplicate bundle section");
      b.forest = DecodeForest(r);
    } else if (tag == kTagMetadata) {
      once(seen_meta);
      b.metadata = DecodeMetadata(r);
    } else {
      continue;  // unknown sections are skipped
    }
    if (!r.done()) {
      throw Error(ErrorCode::kFormat, "trailing bytes in bundle section");
    }
  }
  if (!seen_vect || !seen_scal || !seen_net || !seen_meta) {
    throw Error(ErrorCode::kFormat, "model bundle is missing a required section");
  }
  try {
    b.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::kFormat, std::string("invalid bundle: ") + e.what());
  }
  return b;
}

void save_bundle(const ModelBundle& bundle, std::ostream& out,
                 ParameterEncoding encoding) {
  const auto bytes = serialize_bundle(bundle, encoding);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIo, "failed to write model bundle");
}

void save_bundle(const ModelBundle& bundle, const std::string& path,
                 ParameterEncoding encoding) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot open " + path + " for writing");
  save_bundle(bundle, out, encoding);
  out.close();
  if (!out) throw Error(ErrorCode::kIo, "failed to write " + path);
}

ModelBundle load_bundle(std::istream& in) {
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) throw Error(ErrorCode::kIo, "failed to read model bundle");
  return deserialize_bundle(bytes);
}

ModelBundle load_bundle(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open model bundle " + path);
  return load_bundle(in);
}

}  // namespace urlsentinel
