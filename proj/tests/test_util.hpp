#pragma once

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "aura/aura.hpp"

namespace aura::test {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    std::string name = "aura_test";
    if (info) name += std::string("_") + info->test_suite_name() + "_" + info->name();
    path_ = std::filesystem::temp_directory_path() / name;
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& rel) const { return path_ / rel; }

 private:
  std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream(p, std::ios::binary) << text;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Record with the same before/after MOS on every channel.
inline ClipRecord make_record(const std::string& id, std::vector<float> embedding,
                              const std::vector<std::pair<std::string, double>>& dmos_by_model,
                              std::optional<std::string> label = std::nullopt) {
  ClipRecord r;
  r.clip_id = id;
  r.embedding = std::move(embedding);
  r.noise_label = std::move(label);
  for (const auto& [model, d] : dmos_by_model) {
    r.scores[model] = MosPair{{3.0, 3.0, 3.0}, {3.0 + d, 3.0 + d, 3.0 + d}};
  }
  return r;
}

// n clips x models with DMOS given row-major; 1-d embeddings equal to the index.
inline ClipCollection collection_from_dmos(const std::vector<std::vector<double>>& rows,
                                           std::vector<std::string> models = {}) {
  if (models.empty()) {
    for (std::size_t j = 0; j < rows.at(0).size(); ++j) models.push_back("m" + std::to_string(j));
  }
  std::vector<ClipRecord> records;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::vector<std::pair<std::string, double>> cells;
    for (std::size_t j = 0; j < models.size(); ++j) cells.emplace_back(models[j], rows[i][j]);
    records.push_back(make_record("c" + std::to_string(i), {static_cast<float>(i)}, cells));
  }
  return ClipCollection(1, models, std::move(records));
}

// Cluster model that assigns clips to the given clusters (centroids unused).
inline ClusterModel fixed_clusters(const std::vector<std::uint32_t>& assignments, std::size_t k) {
  ClusterModel m;
  m.k = k;
  m.centroids = Matrix(k, 1);
  for (std::size_t c = 0; c < k; ++c) m.centroids(c, 0) = static_cast<double>(c);
  m.assignments = assignments;
  return m;
}

}  // namespace aura::test
