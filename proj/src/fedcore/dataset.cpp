#include <charconv>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "uavfl/errors.hpp"
#include "uavfl/fedcore.hpp"

namespace uavfl::fedcore {

void LocalDataset::push_back(std::span<const double> x, int label) {
  if (x.size() != num_features) {
    throw ShapeMismatch("dataset: sample has " + std::to_string(x.size()) +
                        " features, expected " + std::to_string(num_features));
  }
  features.insert(features.end(), x.begin(), x.end());
  labels.push_back(label);
}

BlobTask::BlobTask(std::size_t num_classes, std::size_t num_features,
                   double separation, std::uint64_t seed)
    : features_(num_features), centers_(num_classes) {
  if (num_classes < 2 || num_features < 1) {
    throw InvalidConfig("blob task needs >= 2 classes and >= 1 feature");
  }
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, separation);
  for (auto& c : centers_) {
    c.resize(num_features);
    for (auto& v : c) v = normal(rng);
  }
}

void BlobTask::draw(int label, Rng& rng, std::vector<double>& out) const {
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto& c = centers_.at(static_cast<std::size_t>(label));
  out.resize(features_);
  for (std::size_t j = 0; j < features_; ++j) out[j] = c[j] + normal(rng);
}

LocalDataset BlobTask::balanced(std::size_t per_class, Rng& rng,
                                std::size_t owner) const {
  LocalDataset data;
  data.owner = owner;
  data.num_features = features_;
  std::vector<double> x;
  for (std::size_t c = 0; c < centers_.size(); ++c) {
    for (std::size_t i = 0; i < per_class; ++i) {
      draw(static_cast<int>(c), rng, x);
      data.push_back(x, static_cast<int>(c));
    }
  }
  return data;
}

LocalDataset BlobTask::dirichlet(std::size_t count, double alpha, Rng& rng,
                                 std::size_t owner) const {
  std::gamma_distribution<double> gamma(alpha, 1.0);
  std::vector<double> weights(centers_.size());
  double total = 0.0;
  for (auto& w : weights) {
    w = gamma(rng);
    total += w;
  }
  if (!(total > 0.0)) {
    // All gamma draws underflowed; fall back to a single random class.
    std::uniform_int_distribution<std::size_t> pick(0, weights.size() - 1);
    weights.assign(weights.size(), 0.0);
    weights[pick(rng)] = 1.0;
  }
  std::discrete_distribution<int> label_dist(weights.begin(), weights.end());
  LocalDataset data;
  data.owner = owner;
  data.num_features = features_;
  data.features.reserve(count * features_);
  data.labels.reserve(count);
  std::vector<double> x;
  for (std::size_t i = 0; i < count; ++i) {
    const int label = label_dist(rng);
    draw(label, rng, x);
    data.push_back(x, label);
  }
  return data;
}

std::size_t corrupt_labels(LocalDataset& data, double rate,
                           std::size_t num_classes, Rng& rng) {
  if (num_classes < 2 || rate <= 0.0) return 0;
  std::bernoulli_distribution flip(rate);
  std::size_t changed = 0;
  for (auto& label : data.labels) {
    if (!flip(rng)) continue;
    label = (label + 1) % static_cast<int>(num_classes);
    ++changed;
  }
  return changed;
}

void write_dataset_csv(std::ostream& out, const LocalDataset& data,
                       std::size_t num_classes) {
  out << "# uavfl-dataset v1 samples=" << data.size()
      << " features=" << data.num_features << " classes=" << num_classes
      << '\n';
  for (std::size_t j = 0; j < data.num_features; ++j) out << 'f' << j << ',';
  out << "label\n";
  out << std::setprecision(17);
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (double v : data.sample(i)) out << v << ',';
    out << data.labels[i] << '\n';
  }
}

namespace {

std::size_t header_field(const std::string& header, const std::string& key) {
  const auto pos = header.find(key + "=");
  if (pos == std::string::npos) {
    throw FormatError("dataset: header lacks " + key);
  }
  std::size_t value = 0;
  const char* begin = header.data() + pos + key.size() + 1;
  const char* end = header.data() + header.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc()) throw FormatError("dataset: bad " + key + " value");
  return value;
}

}  // namespace

LocalDataset read_dataset_csv(std::istream& in, std::size_t* num_classes) {
  std::string header;
  if (!std::getline(in, header) ||
      header.rfind("# uavfl-dataset v1", 0) != 0) {
    throw FormatError("dataset: missing '# uavfl-dataset v1' header");
  }
  const std::size_t samples = header_field(header, "samples");
  const std::size_t features = header_field(header, "features");
  const std::size_t classes = header_field(header, "classes");
  if (num_classes) *num_classes = classes;

  std::string line;
  if (!std::getline(in, line)) throw FormatError("dataset: missing column row");

  LocalDataset data;
  data.num_features = features;
  data.features.reserve(samples * features);
  data.labels.reserve(samples);
  std::vector<double> row(features);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string cell;
    for (std::size_t j = 0; j < features; ++j) {
      if (!std::getline(fields, cell, ',')) {
        throw FormatError("dataset: short row " + std::to_string(data.size()));
      }
      row[j] = std::stod(cell);
    }
    if (!std::getline(fields, cell)) {
      throw FormatError("dataset: row without label");
    }
    const int label = std::stoi(cell);
    if (label < 0 || static_cast<std::size_t>(label) >= classes) {
      throw FormatError("dataset: label out of range");
    }
    data.push_back(row, label);
  }
  if (data.size() != samples) {
    throw FormatError("dataset: header says " + std::to_string(samples) +
                      " samples, file has " + std::to_string(data.size()));
  }
  return data;
}

void save_dataset(const std::filesystem::path& path, const LocalDataset& data,
                  std::size_t num_classes) {
  std::ofstream out(path);
  if (!out) throw FormatError("dataset: cannot open " + path.string());
  write_dataset_csv(out, data, num_classes);
}

LocalDataset load_dataset(const std::filesystem::path& path,
                          std::size_t* num_classes) {
  std::ifstream in(path);
  if (!in) throw FormatError("dataset: cannot open " + path.string());
  return read_dataset_csv(in, num_classes);
}

}  // namespace uavfl::fedcore
