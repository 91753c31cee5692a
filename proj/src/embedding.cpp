#include "tkgqa/embedding.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "tkgqa/rng.hpp"

static_assert(std::endian::native == std::endian::little,
              "checkpoint format assumes a little-endian host");

namespace tkgqa {

std::uint32_t EmbeddingSet::relation_row_multiplier(ModelTag tag) {
  switch (tag) {
    case ModelTag::kComplex:
    case ModelTag::kTComplex: return 2;
    case ModelTag::kTNTComplex: return 4;
    case ModelTag::kTimePlex: return 6;
  }
  throw std::invalid_argument("bad model tag");
}

bool EmbeddingSet::finite() const {
  auto ok = [](const std::vector<double>& v) {
    for (double x : v)
      if (!std::isfinite(x)) return false;
    return true;
  };
  return ok(entities.re) && ok(entities.im) && ok(relations.re) && ok(relations.im) &&
         ok(timestamps.re) && ok(timestamps.im);
}

EmbeddingSet init_embeddings(ModelTag tag, std::size_t n_entities, std::size_t n_relations,
                             std::size_t n_years, std::size_t dim, std::uint64_t seed,
                             double init_scale) {
  EmbeddingSet emb;
  emb.tag = tag;
  emb.dim = static_cast<std::uint32_t>(dim);
  emb.n_relations = static_cast<std::uint32_t>(n_relations);
  emb.entities = ComplexTable(n_entities + 1, dim);
  emb.relations = ComplexTable(n_relations * EmbeddingSet::relation_row_multiplier(tag), dim);
  emb.timestamps = ComplexTable(n_years + 1, dim);

  Rng rng(seed);
  auto fill = [&](std::vector<double>& v) {
    for (double& x : v) x = init_scale * rng.normal();
  };
  fill(emb.entities.re);
  fill(emb.entities.im);
  fill(emb.relations.re);
  fill(emb.relations.im);
  fill(emb.timestamps.re);
  fill(emb.timestamps.im);
  return emb;
}

namespace {

void write_u32(std::ofstream& out, std::uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

std::uint32_t read_u32(std::ifstream& in, const std::string& path) {
  std::uint32_t v = 0;
  if (!in.read(reinterpret_cast<char*>(&v), sizeof(v)))
    throw std::runtime_error(path + ": truncated checkpoint header");
  return v;
}

void write_plane(std::ofstream& out, const std::vector<double>& v) {
  out.write(reinterpret_cast<const char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(double)));
}

void read_plane(std::ifstream& in, std::vector<double>& v, const std::string& path) {
  if (!in.read(reinterpret_cast<char*>(v.data()),
               static_cast<std::streamsize>(v.size() * sizeof(double))))
    throw std::runtime_error(path + ": truncated checkpoint payload");
}

}  // namespace

void save_checkpoint(const EmbeddingSet& emb, const nlohmann::ordered_json& meta,
                     const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
  out.write("TKGE", 4);
  write_u32(out, kCheckpointVersion);
  const std::uint8_t tag = static_cast<std::uint8_t>(emb.tag);
  out.write(reinterpret_cast<const char*>(&tag), 1);
  write_u32(out, emb.dim);
  write_u32(out, static_cast<std::uint32_t>(emb.entities.rows));
  write_u32(out, static_cast<std::uint32_t>(emb.relations.rows));
  write_u32(out, static_cast<std::uint32_t>(emb.timestamps.rows));
  write_plane(out, emb.entities.re);
  write_plane(out, emb.entities.im);
  write_plane(out, emb.relations.re);
  write_plane(out, emb.relations.im);
  write_plane(out, emb.timestamps.re);
  write_plane(out, emb.timestamps.im);
  if (!out) throw std::runtime_error("checkpoint write failed: " + path);
  out.close();

  std::ofstream mout(path + ".meta.json");
  mout << meta.dump(2) << '\n';
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, "TKGE", 4) != 0)
    throw std::runtime_error(path + ": bad checkpoint magic");
  const std::uint32_t version = read_u32(in, path);
  if (version != kCheckpointVersion)
    throw std::runtime_error(path + ": unsupported checkpoint version " +
                             std::to_string(version));
  std::uint8_t tag = 0;
  if (!in.read(reinterpret_cast<char*>(&tag), 1))
    throw std::runtime_error(path + ": truncated checkpoint header");
  if (tag > 3) throw std::runtime_error(path + ": bad model tag byte");

  LoadedCheckpoint lc;
  lc.emb.tag = static_cast<ModelTag>(tag);
  lc.emb.dim = read_u32(in, path);
  const std::uint32_t ent_rows = read_u32(in, path);
  const std::uint32_t rel_rows = read_u32(in, path);
  const std::uint32_t ts_rows = read_u32(in, path);
  const std::uint32_t mult = EmbeddingSet::relation_row_multiplier(lc.emb.tag);
  if (rel_rows % mult != 0)
    throw std::runtime_error(path + ": relation row count does not match model layout");
  lc.emb.n_relations = rel_rows / mult;
  lc.emb.entities = ComplexTable(ent_rows, lc.emb.dim);
  lc.emb.relations = ComplexTable(rel_rows, lc.emb.dim);
  lc.emb.timestamps = ComplexTable(ts_rows, lc.emb.dim);
  read_plane(in, lc.emb.entities.re, path);
  read_plane(in, lc.emb.entities.im, path);
  read_plane(in, lc.emb.relations.re, path);
  read_plane(in, lc.emb.relations.im, path);
  read_plane(in, lc.emb.timestamps.re, path);
  read_plane(in, lc.emb.timestamps.im, path);
  char extra;
  if (in.read(&extra, 1))
    throw std::runtime_error(path + ": trailing bytes after checkpoint payload");

  const std::string meta_path = path + ".meta.json";
  if (std::filesystem::exists(meta_path)) {
    std::ifstream min(meta_path);
    lc.meta = nlohmann::json::parse(min);
  }
  return lc;
}

}  // namespace tkgqa
