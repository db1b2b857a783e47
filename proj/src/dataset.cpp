#include "aura/dataset.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "aura/error.hpp"
#include "binary_io.hpp"

namespace aura {

using ordered_json = nlohmann::ordered_json;

std::string_view to_string(Channel channel) {
  switch (channel) {
    case Channel::kSig:
      return "sig";
    case Channel::kBak:
      return "bak";
    case Channel::kOvrl:
      return "ovrl";
  }
  return "?";
}

Channel parse_channel(std::string_view name) {
  if (name == "sig" || name == "SIG") return Channel::kSig;
  if (name == "bak" || name == "BAK") return Channel::kBak;
  if (name == "ovrl" || name == "OVRL") return Channel::kOvrl;
  throw InvalidInput("unknown channel \"" + std::string(name) + "\" (expected sig, bak or ovrl)");
}

double MosTriple::operator[](Channel c) const {
  switch (c) {
    case Channel::kSig:
      return sig;
    case Channel::kBak:
      return bak;
    case Channel::kOvrl:
      return ovrl;
  }
  return ovrl;
}

double DmosTriple::operator[](Channel c) const {
  switch (c) {
    case Channel::kSig:
      return sig;
    case Channel::kBak:
      return bak;
    case Channel::kOvrl:
      return ovrl;
  }
  return ovrl;
}

void validate_mos(const MosTriple& mos, std::string_view where) {
  for (double v : {mos.sig, mos.bak, mos.ovrl}) {
    if (!std::isfinite(v) || v < kMosMin || v > kMosMax) {
      std::ostringstream msg;
      msg << "MOS out of range [1, 5]: " << v << " (" << where << ")";
      throw InvalidInput(msg.str());
    }
  }
}

ClipCollection::ClipCollection(std::size_t dim, std::vector<std::string> model_ids,
                               std::vector<ClipRecord> records)
    : dim_(dim), model_ids_(std::move(model_ids)), records_(std::move(records)) {
  if (dim_ == 0) throw InvalidInput("embedding dimension must be positive");
  std::unordered_map<std::string, bool> known_models;
  for (const auto& m : model_ids_) {
    if (!known_models.emplace(m, true).second) {
      throw InvalidInput("duplicate model id \"" + m + "\"");
    }
  }
  index_.reserve(records_.size());
  for (std::size_t i = 0; i < records_.size(); ++i) {
    const ClipRecord& r = records_[i];
    const std::string where = "clip \"" + r.clip_id + "\"";
    if (r.clip_id.empty()) throw InvalidInput("empty clip_id at record " + std::to_string(i));
    if (!index_.emplace(r.clip_id, i).second) throw InvalidInput("duplicate clip_id: " + where);
    if (r.embedding.size() != dim_) {
      throw InvalidInput("dimension mismatch: " + where + " has " +
                         std::to_string(r.embedding.size()) + " components, expected " +
                         std::to_string(dim_));
    }
    for (float v : r.embedding) {
      if (!std::isfinite(v)) throw InvalidInput("non-finite embedding value: " + where);
    }
    for (const auto& [model, pair] : r.scores) {
      if (!known_models.contains(model)) {
        throw InvalidInput("unknown model \"" + model + "\" in " + where);
      }
      validate_mos(pair.before, where + ", model " + model + ", before");
      validate_mos(pair.after, where + ", model " + model + ", after");
    }
  }
}

std::optional<std::size_t> ClipCollection::find(std::string_view clip_id) const {
  auto it = index_.find(std::string(clip_id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

Matrix ClipCollection::points() const {
  Matrix m(records_.size(), dim_);
  for (std::size_t i = 0; i < records_.size(); ++i) {
    auto row = m.row(i);
    for (std::size_t j = 0; j < dim_; ++j) row[j] = records_[i].embedding[j];
  }
  return m;
}

DmosTriple dmos(const ClipRecord& record, std::string_view model_id) {
  auto it = record.scores.find(std::string(model_id));
  if (it == record.scores.end()) {
    throw InvalidInput("clip \"" + record.clip_id + "\" has no score for model \"" +
                       std::string(model_id) + "\"");
  }
  const MosPair& p = it->second;
  return {p.after.sig - p.before.sig, p.after.bak - p.before.bak, p.after.ovrl - p.before.ovrl};
}

Matrix dmos_matrix(const ClipCollection& collection, Channel channel) {
  const auto& models = collection.model_ids();
  Matrix out(collection.size(), models.size());
  for (std::size_t i = 0; i < collection.size(); ++i) {
    const ClipRecord& r = collection[i];
    for (std::size_t j = 0; j < models.size(); ++j) {
      auto it = r.scores.find(models[j]);
      if (it == r.scores.end()) {
        throw InvalidInput("missing score cell: clip \"" + r.clip_id + "\", model \"" +
                           models[j] + "\"");
      }
      out(i, j) = it->second.after[channel] - it->second.before[channel];
    }
  }
  return out;
}

EmbeddingBlock read_embeddings(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open embedding file " + path.string());
  const auto header = detail::read_header(in, kEmbeddingMagic);
  if (header.dim == 0) throw InvalidInput("embedding file declares dim 0");
  EmbeddingBlock block;
  block.count = header.count;
  block.dim = header.dim;
  const std::size_t n = static_cast<std::size_t>(header.count) * header.dim;
  block.values.resize(n);
  for (std::size_t i = 0; i < n; ++i) block.values[i] = detail::get_f32(in, "embedding values");
  if (in.peek() != std::char_traits<char>::eof()) {
    throw InvalidInput("embedding file has trailing bytes beyond count x dim values");
  }
  return block;
}

void write_embeddings(const std::filesystem::path& path, const EmbeddingBlock& block) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write embedding file " + path.string());
  detail::write_header(out, kEmbeddingMagic, {block.count, block.dim});
  for (float v : block.values) detail::put_f32(out, v);
  if (!out) throw Error("write failed for " + path.string());
}

namespace {

MosTriple parse_triple(const ordered_json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 3) {
    throw InvalidInput("expected [sig, bak, ovrl] array (" + where + ")");
  }
  for (const auto& v : j) {
    if (!v.is_number()) throw InvalidInput("non-numeric MOS value (" + where + ")");
  }
  MosTriple t{j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
  validate_mos(t, where);
  return t;
}

ordered_json triple_json(const MosTriple& t) { return ordered_json::array({t.sig, t.bak, t.ovrl}); }

}  // namespace

ClipCollection load_collection(const std::filesystem::path& manifest_path,
                               const std::filesystem::path& embeddings_path,
                               const LoadOptions& options) {
  std::ifstream in(manifest_path);
  if (!in) throw InvalidInput("cannot open manifest " + manifest_path.string());

  std::vector<ClipRecord> records;
  std::vector<std::string> model_ids;
  std::unordered_map<std::string, std::size_t> seen_models;
  std::unordered_map<std::string, std::size_t> seen_clips;

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string at_line = "line " + std::to_string(line_no);
    ordered_json j;
    try {
      j = ordered_json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw InvalidInput("manifest parse error at " + at_line + ": " + e.what());
    }
    if (!j.is_object() || !j.contains("clip_id") || !j["clip_id"].is_string()) {
      throw InvalidInput("manifest " + at_line + ": missing string field clip_id");
    }
    ClipRecord rec;
    rec.clip_id = j["clip_id"].get<std::string>();
    const std::string where = at_line + ", clip \"" + rec.clip_id + "\"";
    if (!seen_clips.emplace(rec.clip_id, line_no).second) {
      throw InvalidInput("duplicate clip_id at " + where + " (first seen at line " +
                         std::to_string(seen_clips[rec.clip_id]) + ")");
    }
    if (auto it = j.find("noise_label"); it != j.end() && !it->is_null()) {
      if (!it->is_string()) throw InvalidInput("noise_label must be string or null at " + where);
      rec.noise_label = it->get<std::string>();
    }
    if (auto it = j.find("scores"); it != j.end()) {
      if (!it->is_object()) throw InvalidInput("scores must be an object at " + where);
      for (const auto& [model, pair] : it->items()) {
        const std::string cell = where + ", model " + model;
        if (!pair.is_object() || !pair.contains("before") || !pair.contains("after")) {
          throw InvalidInput("score cell needs before and after (" + cell + ")");
        }
        MosPair mp{parse_triple(pair["before"], cell + ", before"),
                   parse_triple(pair["after"], cell + ", after")};
        rec.scores.emplace(model, mp);
        if (seen_models.emplace(model, model_ids.size()).second) model_ids.push_back(model);
      }
    }
    records.push_back(std::move(rec));
  }

  const EmbeddingBlock block = read_embeddings(embeddings_path);
  if (block.count != records.size()) {
    throw InvalidInput("row-count mismatch: manifest has " + std::to_string(records.size()) +
                       " rows, embedding file declares " + std::to_string(block.count));
  }
  if (options.expected_dim && *options.expected_dim != block.dim) {
    throw InvalidInput("dimension mismatch: embedding file declares dim " +
                       std::to_string(block.dim) + ", expected " +
                       std::to_string(*options.expected_dim));
  }
  for (std::size_t i = 0; i < records.size(); ++i) {
    const float* row = block.values.data() + i * block.dim;
    records[i].embedding.assign(row, row + block.dim);
    for (float v : records[i].embedding) {
      if (!std::isfinite(v)) {
        throw InvalidInput("non-finite embedding value for clip \"" + records[i].clip_id +
                           "\" (row " + std::to_string(i) + ")");
      }
    }
  }
  return ClipCollection(block.dim, std::move(model_ids), std::move(records));
}

void write_collection(const ClipCollection& collection,
                      const std::filesystem::path& manifest_path,
                      const std::filesystem::path& embeddings_path) {
  std::ofstream out(manifest_path, std::ios::trunc);
  if (!out) throw Error("cannot write manifest " + manifest_path.string());
  for (const ClipRecord& r : collection.records()) {
    ordered_json j;
    j["clip_id"] = r.clip_id;
    j["noise_label"] = r.noise_label ? ordered_json(*r.noise_label) : ordered_json(nullptr);
    ordered_json scores = ordered_json::object();
    for (const auto& model : collection.model_ids()) {
      auto it = r.scores.find(model);
      if (it == r.scores.end()) continue;
      scores[model] = {{"before", triple_json(it->second.before)},
                       {"after", triple_json(it->second.after)}};
    }
    j["scores"] = std::move(scores);
    out << j.dump() << '\n';
  }
  if (!out) throw Error("write failed for " + manifest_path.string());

  EmbeddingBlock block;
  block.count = static_cast<std::uint32_t>(collection.size());
  block.dim = static_cast<std::uint32_t>(collection.dim());
  block.values.reserve(collection.size() * collection.dim());
  for (const ClipRecord& r : collection.records()) {
    block.values.insert(block.values.end(), r.embedding.begin(), r.embedding.end());
  }
  write_embeddings(embeddings_path, block);
}

}  // namespace aura
