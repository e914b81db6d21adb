#include "nilwalk/io.hpp"

#include <nlohmann/json.hpp>

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace nilwalk {

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const Mat& rows) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw std::runtime_error("cannot open " + path);
  for (size_t i = 0; i < header.size(); ++i)
    std::fprintf(f, "%s%s", header[i].c_str(), i + 1 < header.size() ? "," : "\n");
  for (long r = 0; r < rows.rows(); ++r)
    for (long c = 0; c < rows.cols(); ++c)
      std::fprintf(f, "%.17g%s", rows(r, c), c + 1 < rows.cols() ? "," : "\n");
  std::fclose(f);
}

void write_batch_csv(const std::string& path, const SampleBatch& batch) {
  write_csv(path, batch.names, batch.data);
}

std::string config_hash(const nlohmann::json& config) {
  std::string dump = config.dump();  // nlohmann::json objects iterate sorted
  uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : dump) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
  return buf;
}

void write_batch_metadata(const std::string& path, const SampleBatch& batch,
                          const nlohmann::json& config) {
  nlohmann::json j;
  j["config_hash"] = batch.config_hash.empty() ? config_hash(config) : batch.config_hash;
  j["seed"] = batch.seed;
  j["N"] = batch.N;
  j["trials"] = batch.data.rows();
  j["columns"] = batch.names;
  write_json(path, j);
}

namespace {

nlohmann::json ratmat_to_json(const RatMat& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : m) {
    nlohmann::json row = nlohmann::json::array();
    for (const auto& x : r) row.push_back(rational_to_string(x));
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

nlohmann::json filtration_to_json(const Filtration& f) {
  nlohmann::json j;
  j["kind"] = f.kind == FiltrationKind::Central ? "central" : "weight";
  nlohmann::json bias = nlohmann::json::array();
  for (const auto& x : f.bias) bias.push_back(rational_to_string(x));
  j["bias"] = bias;
  nlohmann::json spaces = nlohmann::json::array();
  for (const auto& g : f.subspaces) spaces.push_back(ratmat_to_json(g));
  j["subspaces"] = spaces;
  nlohmann::json dims = nlohmann::json::array();
  for (int i = 1; i <= f.b_max(); ++i) dims.push_back(f.dim_at(i));
  j["dims"] = dims;
  j["homogeneous_dimension"] = homogeneous_dimension(f);
  return j;
}

nlohmann::json decomposition_to_json(const WeightDecomposition& dec) {
  nlohmann::json j;
  j["weights"] = dec.weights;
  j["basis"] = ratmat_to_json(dec.basis);
  nlohmann::json drift = nlohmann::json::array();
  for (const auto& x : dec.drift) drift.push_back(rational_to_string(x));
  j["drift"] = drift;
  j["filtration"] = filtration_to_json(dec.filt);
  return j;
}

void write_json(const std::string& path, const nlohmann::json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << j.dump(2) << "\n";
}

nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  nlohmann::json j;
  in >> j;
  return j;
}

}  // namespace nilwalk
