#include "motifbench/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <unordered_map>

#include "motifbench/rng.hpp"

namespace motifbench {

namespace {

constexpr char kMagic[8] = {'M', 'B', 'D', 'A', 'T', 'A', '0', '1'};
constexpr uint32_t kTextWidth = 16;

// Fixed lexicon for text records; the distribution picks word ranks, giving
// key-frequency patterns without shipping a real corpus.
constexpr const char* kLexicon[] = {
    "alder",   "basalt", "cedar",   "delta",   "ember",   "fjord",  "garnet",
    "harbor",  "ingot",  "juniper", "kestrel", "lagoon",  "marble", "nickel",
    "onyx",    "prairie", "quartz", "ridge",   "summit",  "thicket", "umber",
    "valley",  "willow", "xenon",   "yarrow",  "zephyr",  "anvil",  "breeze",
    "cobalt",  "dune",   "estuary", "flint",   "glacier", "heath",  "island",
    "jasper",  "krill",  "lichen",  "meadow",  "nectar",  "orchard", "pebble",
    "quarry",  "reef",   "shale",   "tundra",  "upland",  "vapor",  "wharf",
    "yucca",   "zinc",   "aspen",   "birch",   "cliff",   "drift",  "eddy",
    "fen",     "grove",  "holt",    "inlet",   "knoll",   "loch",   "mesa",
    "notch"};
constexpr uint64_t kLexiconSize = sizeof(kLexicon) / sizeof(kLexicon[0]);

// Floor with a small forgiveness term so exact-math integer products
// (0.3 * 10 = 3) survive binary rounding.
uint64_t floor_count(double fraction, uint64_t n) {
  return uint64_t(std::floor(fraction * double(n) + 1e-9));
}

uint64_t zero_count(const DataDescriptor& desc, uint64_t n) {
  return floor_count(desc.sparsity, n);
}

// Maps one distribution draw to a rank in [0, n).
uint64_t draw_rank(Rng& rng, ZipfSampler* zipf, Distribution dist, uint64_t n) {
  switch (dist) {
    case Distribution::uniform: return rng.below(n);
    case Distribution::zipf: return std::min(zipf->sample(rng), n - 1);
    case Distribution::gaussian: {
      double g = double(n) * 0.5 + rng.gaussian() * double(n) / 6.0;
      if (g < 0) g = 0;
      if (g > double(n - 1)) g = double(n - 1);
      return uint64_t(g);
    }
  }
  return 0;
}

// One nonzero sample per element. Zeros are reserved for sparsity slots, so
// any accidental 0.0 draw is nudged to a tiny value.
double draw_value(Rng& rng, ZipfSampler* zipf, Distribution dist) {
  double v = 0.0;
  switch (dist) {
    case Distribution::uniform: v = rng.nonzero_unit(); break;
    case Distribution::gaussian: v = rng.gaussian(); break;
    case Distribution::zipf: v = 1.0 / double(1 + zipf->sample(rng)); break;
  }
  if (v == 0.0) v = 1e-12;
  return v;
}

template <typename T>
void fill_numeric(std::vector<T>& out, const DataDescriptor& desc, uint64_t n) {
  out.resize(n);
  Rng rng(derive_seed(desc.seed, "values"));
  ZipfSampler zipf(std::min<uint64_t>(std::max<uint64_t>(n, 2), 1u << 16), 1.1);
  for (uint64_t i = 0; i < n; ++i) out[i] = T(draw_value(rng, &zipf, desc.distribution));

  const uint64_t zeros = zero_count(desc, n);
  for (uint64_t idx : choose_indices(n, zeros, derive_seed(desc.seed, "sparsity")))
    out[idx] = T(0);
}

void write_u32(std::ofstream& f, uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16),
                        static_cast<unsigned char>(v >> 24)};
  f.write(reinterpret_cast<const char*>(b), 4);
}

uint32_t read_u32(std::ifstream& f) {
  unsigned char b[4];
  f.read(reinterpret_cast<char*>(b), 4);
  return uint32_t(b[0]) | uint32_t(b[1]) << 8 | uint32_t(b[2]) << 16 |
         uint32_t(b[3]) << 24;
}

}  // namespace

std::vector<uint64_t> choose_indices(uint64_t n, uint64_t k, uint64_t seed) {
  if (k > n) throw ParameterError("cannot choose more indices than exist");
  // Partial Fisher-Yates over a virtual [0, n) array: only touched slots are
  // materialized, so cost is O(k) regardless of n.
  std::unordered_map<uint64_t, uint64_t> swapped;
  swapped.reserve(size_t(2 * k));
  std::vector<uint64_t> picks;
  picks.reserve(size_t(k));
  Rng rng(seed);
  for (uint64_t i = 0; i < k; ++i) {
    uint64_t j = i + rng.below(n - i);
    auto ji = swapped.find(j);
    uint64_t value_j = ji == swapped.end() ? j : ji->second;
    auto ii = swapped.find(i);
    uint64_t value_i = ii == swapped.end() ? i : ii->second;
    picks.push_back(value_j);
    swapped[j] = value_i;
  }
  std::sort(picks.begin(), picks.end());
  return picks;
}

DatasetPtr generate_dataset(const DataDescriptor& desc) {
  desc.validate();
  auto out = std::make_shared<Dataset>();
  out->kind = desc.kind;
  switch (desc.kind) {
    case DataKind::vectors:
      fill_numeric(out->values, desc, desc.size);
      break;
    case DataKind::tensor:
      out->dims = desc.dims;
      fill_numeric(out->floats, desc, desc.dims.elements());
      break;
    case DataKind::text: {
      out->text_width = kTextWidth;
      out->text.resize(desc.size * kTextWidth, ' ');
      Rng rng(derive_seed(desc.seed, "values"));
      ZipfSampler zipf(kLexiconSize, 1.1);
      for (uint64_t r = 0; r < desc.size; ++r) {
        char* rec = out->text.data() + r * kTextWidth;
        const char* word = kLexicon[draw_rank(rng, &zipf, desc.distribution,
                                              kLexiconSize)];
        size_t len = std::min(std::strlen(word), size_t(kTextWidth - 1));
        std::memcpy(rec, word, len);
        rec[kTextWidth - 1] = '\n';
      }
      break;
    }
    case DataKind::graph: {
      out->vertices = desc.vertices;
      out->edges.resize(desc.size);
      Rng rng(derive_seed(desc.seed, "edges"));
      // Preferential attachment blended with uniform edges: skewed modes
      // sample destinations from already-used endpoints half the time, so
      // popular vertices keep accumulating in-degree.
      std::vector<uint32_t> pool;
      const bool skewed = desc.distribution != Distribution::uniform;
      if (skewed) pool.reserve(desc.size);
      for (uint64_t i = 0; i < desc.size; ++i) {
        uint64_t src = rng.below(desc.vertices);
        uint64_t dst;
        if (skewed && !pool.empty() && rng.below(2) == 0)
          dst = pool[rng.below(pool.size())];
        else
          dst = rng.below(desc.vertices);
        if (skewed) pool.push_back(uint32_t(dst));
        out->edges[i] = src << 32 | dst;
      }
      break;
    }
  }
  return out;
}

nlohmann::json descriptor_to_json(const DataDescriptor& desc) {
  nlohmann::json j;
  j["kind"] = to_string(desc.kind);
  j["size"] = desc.size;
  j["sparsity"] = desc.sparsity;
  j["distribution"] = to_string(desc.distribution);
  j["seed"] = desc.seed;
  if (desc.kind == DataKind::graph) j["vertices"] = desc.vertices;
  if (desc.kind == DataKind::tensor)
    j["dims"] = {desc.dims.n, desc.dims.h, desc.dims.w, desc.dims.c};
  return j;
}

DataDescriptor descriptor_from_json(const nlohmann::json& j) {
  DataDescriptor d;
  try {
    d.kind = parse_data_kind(j.at("kind").get<std::string>());
    d.size = j.at("size").get<uint64_t>();
    d.sparsity = j.value("sparsity", 0.0);
    d.distribution = parse_distribution(j.value("distribution", std::string("uniform")));
    d.seed = j.value("seed", uint64_t(0));
    d.vertices = j.value("vertices", uint64_t(0));
    if (j.contains("dims")) {
      const auto& a = j.at("dims");
      if (!a.is_array() || a.size() != 4)
        throw ParseError("tensor dims must be a 4-element array");
      d.dims = {a[0].get<uint32_t>(), a[1].get<uint32_t>(), a[2].get<uint32_t>(),
                a[3].get<uint32_t>()};
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad data descriptor: ") + e.what());
  }
  d.validate();
  return d;
}

void save_dataset(const Dataset& data, const DataDescriptor& desc,
                  const std::string& path) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open for write: " + path);
  nlohmann::json header = descriptor_to_json(desc);
  if (data.kind == DataKind::text) header["text_width"] = data.text_width;
  const std::string hs = header.dump();
  f.write(kMagic, sizeof(kMagic));
  write_u32(f, uint32_t(hs.size()));
  f.write(hs.data(), std::streamsize(hs.size()));
  f.write(data.record_data(), std::streamsize(data.content_bytes()));
  if (!f) throw IoError("write failed: " + path);
}

DataRef load_dataset(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open: " + path);
  char magic[8];
  f.read(magic, sizeof(magic));
  if (!f || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw ParseError("not a dataset file: " + path);
  const uint32_t hlen = read_u32(f);
  std::string hs(hlen, '\0');
  f.read(hs.data(), hlen);
  if (!f) throw ParseError("truncated dataset header: " + path);

  nlohmann::json header;
  try {
    header = nlohmann::json::parse(hs);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad dataset header: ") + e.what());
  }

  DataRef ref;
  ref.descriptor = descriptor_from_json(header);
  ref.path = path;

  auto data = std::make_shared<Dataset>();
  data->kind = ref.descriptor.kind;
  const uint64_t n = ref.descriptor.element_count();
  switch (data->kind) {
    case DataKind::text:
      data->text_width = header.value("text_width", kTextWidth);
      data->text.resize(n * data->text_width);
      break;
    case DataKind::vectors: data->values.resize(n); break;
    case DataKind::graph:
      data->vertices = ref.descriptor.vertices;
      data->edges.resize(n);
      break;
    case DataKind::tensor:
      data->dims = ref.descriptor.dims;
      data->floats.resize(n);
      break;
  }
  f.read(const_cast<char*>(data->record_data()),
         std::streamsize(data->content_bytes()));
  if (!f || uint64_t(f.gcount()) != data->content_bytes())
    throw IoError("truncated dataset payload: " + path);

  ref.data = data;
  ref.checksum = data->checksum();
  return ref;
}

DataDescriptor scale_descriptor(const DataDescriptor& desc, double factor) {
  if (!(factor > 0.0) || !std::isfinite(factor))
    throw ParameterError("scale factor must be positive and finite");
  DataDescriptor out = desc;
  if (desc.kind == DataKind::tensor) {
    out.dims.n = uint32_t(std::max<long long>(1, std::llround(desc.dims.n * factor)));
  } else {
    out.size = uint64_t(std::max<long long>(1, std::llround(double(desc.size) * factor)));
  }
  return out;
}

DataDescriptor describe_dataset(const Dataset& data, uint64_t seed) {
  DataDescriptor d;
  d.kind = data.kind;
  d.size = data.element_count();
  d.seed = seed;
  d.vertices = data.vertices;
  d.dims = data.dims;
  return d;
}

}  // namespace motifbench
