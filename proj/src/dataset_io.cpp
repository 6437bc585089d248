#include "ciosl/dataset_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace ciosl {

namespace {

constexpr std::size_t kHeaderBytes = 8 + 4 * 4;

std::uint32_t read_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t read_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

float read_f32(const unsigned char* p) {
  const std::uint32_t bits = read_u32(p);
  float f;
  std::memcpy(&f, &bits, sizeof(f));
  return f;
}

void write_u32(std::ostream& os, std::uint32_t v) {
  const unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                              static_cast<unsigned char>((v >> 8) & 0xff),
                              static_cast<unsigned char>((v >> 16) & 0xff),
                              static_cast<unsigned char>((v >> 24) & 0xff)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

void write_u16(std::ostream& os, std::uint16_t v) {
  const unsigned char b[2] = {static_cast<unsigned char>(v & 0xff),
                              static_cast<unsigned char>((v >> 8) & 0xff)};
  os.write(reinterpret_cast<const char*>(b), 2);
}

void write_f32(std::ostream& os, float f) {
  std::uint32_t bits;
  std::memcpy(&bits, &f, sizeof(bits));
  write_u32(os, bits);
}

}  // namespace

Dataset load_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_dataset: cannot open '" + path + "'");
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (bytes.size() < kHeaderBytes) {
    throw std::runtime_error("load_dataset: '" + path + "' truncated: header needs " +
                             std::to_string(kHeaderBytes) + " bytes, file has " +
                             std::to_string(bytes.size()));
  }
  if (std::memcmp(bytes.data(), kDatasetMagic, 8) != 0) {
    throw std::runtime_error("load_dataset: '" + path +
                             "' has bad magic bytes at offset 0 (expected CIOSL1)");
  }
  Dataset ds;
  const std::uint32_t n = read_u32(bytes.data() + 8);
  ds.dim = read_u32(bytes.data() + 12);
  ds.num_classes = read_u32(bytes.data() + 16);
  const std::uint32_t flags = read_u32(bytes.data() + 20);
  ds.has_instance_metadata = (flags & 1u) != 0;
  if (ds.dim == 0) {
    throw std::runtime_error("load_dataset: '" + path +
                             "' declares embedding dim 0 at offset 12");
  }
  if (ds.num_classes == 0) {
    throw std::runtime_error("load_dataset: '" + path +
                             "' declares class count 0 at offset 16");
  }
  const std::size_t record_bytes = 4UL * ds.dim + 2 + 2 + 4;
  const std::size_t expected = kHeaderBytes + static_cast<std::size_t>(n) * record_bytes;
  if (bytes.size() != expected) {
    throw std::runtime_error("load_dataset: '" + path + "' truncated: expected " +
                             std::to_string(expected) + " bytes for " + std::to_string(n) +
                             " records, got " + std::to_string(bytes.size()));
  }
  ds.records.resize(n);
  const unsigned char* p = bytes.data() + kHeaderBytes;
  for (std::uint32_t i = 0; i < n; ++i) {
    DatasetRecord& r = ds.records[i];
    r.z.resize(ds.dim);
    for (std::uint32_t d = 0; d < ds.dim; ++d) {
      r.z[d] = static_cast<double>(read_f32(p));
      p += 4;
    }
    r.label = read_u16(p);
    p += 2;
    r.instance_id = read_u16(p);
    p += 2;
    r.frame_index = read_u32(p);
    p += 4;
    if (r.label >= ds.num_classes) {
      const std::size_t offset = kHeaderBytes + static_cast<std::size_t>(i) * record_bytes +
                                 4UL * ds.dim;
      throw std::runtime_error("load_dataset: '" + path + "' record " + std::to_string(i) +
                               " at offset " + std::to_string(offset) + " has label " +
                               std::to_string(r.label) + " >= class count " +
                               std::to_string(ds.num_classes));
    }
  }
  return ds;
}

void save_dataset(const Dataset& dataset, const std::string& path) {
  if (dataset.dim == 0) throw std::invalid_argument("save_dataset: embedding dim is 0");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("save_dataset: cannot open '" + path + "' for writing");
  out.write(kDatasetMagic, 8);
  write_u32(out, static_cast<std::uint32_t>(dataset.records.size()));
  write_u32(out, dataset.dim);
  write_u32(out, dataset.num_classes);
  write_u32(out, dataset.has_instance_metadata ? 1u : 0u);
  for (const auto& r : dataset.records) {
    if (r.z.size() != dataset.dim) {
      throw std::invalid_argument("save_dataset: record embedding length " +
                                  std::to_string(r.z.size()) + " != declared dim " +
                                  std::to_string(dataset.dim));
    }
    if (r.label > 0xffff || r.instance_id > 0xffff) {
      throw std::invalid_argument("save_dataset: label/instance_id exceed u16 range");
    }
    for (double v : r.z) write_f32(out, static_cast<float>(v));
    write_u16(out, static_cast<std::uint16_t>(r.label));
    write_u16(out, static_cast<std::uint16_t>(r.instance_id));
    write_u32(out, r.frame_index);
  }
  if (!out) throw std::runtime_error("save_dataset: write to '" + path + "' failed");
}

Dataset gen_synthetic(const SyntheticSpec& spec) {
  if (spec.n_classes == 0 || spec.n_instances == 0 || spec.frames_per_instance == 0 ||
      spec.dim == 0) {
    throw std::invalid_argument("gen_synthetic: all counts must be >= 1");
  }
  RandomSource rng(derive_seed(spec.seed, "synthetic"));
  Dataset ds;
  ds.dim = static_cast<std::uint32_t>(spec.dim);
  ds.num_classes = static_cast<std::uint32_t>(spec.n_classes);
  ds.has_instance_metadata = true;
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(spec.dim));

  for (std::size_t c = 0; c < spec.n_classes; ++c) {
    // Class center on the unit sphere.
    std::vector<double> center(spec.dim);
    double norm = 0.0;
    for (double& x : center) {
      x = rng.normal();
      norm += x * x;
    }
    norm = std::sqrt(norm);
    for (double& x : center) x /= norm;

    for (std::size_t inst = 0; inst < spec.n_instances; ++inst) {
      std::vector<double> sub_center(spec.dim);
      for (std::size_t d = 0; d < spec.dim; ++d) {
        sub_center[d] = center[d] + spec.cluster_spread * inv_sqrt_d * rng.normal();
      }
      std::vector<double> point = sub_center;
      for (std::size_t f = 0; f < spec.frames_per_instance; ++f) {
        if (f > 0) {
          const double step = 0.2 * spec.cluster_spread * inv_sqrt_d;
          for (std::size_t d = 0; d < spec.dim; ++d) point[d] += step * rng.normal();
        }
        DatasetRecord r;
        r.z = point;
        r.label = static_cast<std::uint32_t>(c);
        r.instance_id = static_cast<std::uint32_t>(inst);
        r.frame_index = static_cast<std::uint32_t>(f);
        ds.records.push_back(std::move(r));
      }
    }
  }
  return ds;
}

Dataset import_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("import_csv: cannot open '" + path + "'");
  Dataset ds;
  std::string line;
  std::size_t line_no = 0;
  std::uint32_t max_label = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (line_no == 1) {
      // Header detection: first field not parseable as a number.
      char* end = nullptr;
      std::strtod(fields[0].c_str(), &end);
      if (end == fields[0].c_str()) continue;
    }
    if (fields.size() < 4) {
      throw std::runtime_error("import_csv: line " + std::to_string(line_no) +
                               " has " + std::to_string(fields.size()) +
                               " fields, need at least 4 (label,instance,frame,f0)");
    }
    DatasetRecord r;
    try {
      r.label = static_cast<std::uint32_t>(std::stoul(fields[0]));
      r.instance_id = static_cast<std::uint32_t>(std::stoul(fields[1]));
      r.frame_index = static_cast<std::uint32_t>(std::stoul(fields[2]));
      for (std::size_t i = 3; i < fields.size(); ++i) r.z.push_back(std::stod(fields[i]));
    } catch (const std::exception&) {
      throw std::runtime_error("import_csv: line " + std::to_string(line_no) +
                               " has a non-numeric field");
    }
    if (ds.dim == 0) {
      ds.dim = static_cast<std::uint32_t>(r.z.size());
    } else if (r.z.size() != ds.dim) {
      throw std::runtime_error("import_csv: line " + std::to_string(line_no) + " has " +
                               std::to_string(r.z.size()) + " features, expected " +
                               std::to_string(ds.dim));
    }
    max_label = std::max(max_label, r.label);
    if (r.instance_id != 0 || r.frame_index != 0) ds.has_instance_metadata = true;
    ds.records.push_back(std::move(r));
  }
  if (ds.records.empty()) throw std::runtime_error("import_csv: '" + path + "' has no rows");
  ds.num_classes = max_label + 1;
  return ds;
}

TrainTestSplit split_train_test(const Dataset& dataset, double test_fraction) {
  if (test_fraction < 0.0 || test_fraction >= 1.0) {
    throw std::invalid_argument("split_train_test: test_fraction must be in [0, 1)");
  }
  std::map<std::pair<std::uint32_t, std::uint32_t>, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < dataset.records.size(); ++i) {
    const auto& r = dataset.records[i];
    const std::uint32_t inst = dataset.has_instance_metadata ? r.instance_id : 0;
    groups[{r.label, inst}].push_back(i);
  }
  TrainTestSplit split;
  for (auto& [key, members] : groups) {
    if (dataset.has_instance_metadata) {
      std::stable_sort(members.begin(), members.end(), [&](std::size_t a, std::size_t b) {
        return dataset.records[a].frame_index < dataset.records[b].frame_index;
      });
    }
    const std::size_t n_test =
        static_cast<std::size_t>(std::ceil(test_fraction * static_cast<double>(members.size())));
    const std::size_t n_train = members.size() - n_test;
    for (std::size_t k = 0; k < members.size(); ++k) {
      (k < n_train ? split.train : split.test).push_back(members[k]);
    }
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

Dataset subset(const Dataset& dataset, const std::vector<std::size_t>& indices) {
  Dataset out;
  out.dim = dataset.dim;
  out.num_classes = dataset.num_classes;
  out.has_instance_metadata = dataset.has_instance_metadata;
  out.records.reserve(indices.size());
  for (std::size_t i : indices) out.records.push_back(dataset.records.at(i));
  return out;
}

}  // namespace ciosl
