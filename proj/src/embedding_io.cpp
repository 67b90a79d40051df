#include <bit>
#include <cstring>
#include <json.hpp>

#include "rapt/error.hpp"
#include "rapt/fileio.hpp"
#include "rapt/retrieval.hpp"

namespace rapt {

namespace {

constexpr char kMagic[8] = {'R', 'A', 'P', 'T', 'E', 'M', 'B', '1'};

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

std::uint32_t get_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void check_uniform_dim(std::span<const EmbeddingEntry> entries) {
  for (const auto& e : entries) {
    if (e.vector.size() != entries.front().vector.size()) {
      throw DataError("embedding '" + e.id + "' has dimension " + std::to_string(e.vector.size()) +
                      ", expected " + std::to_string(entries.front().vector.size()));
    }
  }
}

}  // namespace

std::filesystem::path default_ids_path(const std::filesystem::path& path) {
  auto out = path;
  out += ".ids.jsonl";
  return out;
}

std::vector<EmbeddingEntry> load_embeddings_jsonl(const std::filesystem::path& path) {
  std::vector<EmbeddingEntry> entries;
  const auto lines = read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].find_first_not_of(" \t") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(lines[i]);
      EmbeddingEntry e;
      e.id = j.at("id").get<std::string>();
      e.vector = j.at("vector").get<std::vector<double>>();
      if (!entries.empty() && e.vector.size() != entries.front().vector.size()) {
        throw ParseError(path.string(), i + 1,
                         "dimension " + std::to_string(e.vector.size()) + " differs from " +
                             std::to_string(entries.front().vector.size()));
      }
      entries.push_back(std::move(e));
    } catch (const nlohmann::json::exception& ex) {
      throw ParseError(path.string(), i + 1, ex.what());
    }
  }
  return entries;
}

void save_embeddings_jsonl(const std::filesystem::path& path, std::span<const EmbeddingEntry> entries) {
  check_uniform_dim(entries);
  std::string out;
  for (const auto& e : entries) {
    out += nlohmann::json{{"id", e.id}, {"vector", e.vector}}.dump();
    out += '\n';
  }
  write_file_atomic(path, out);
}

std::vector<EmbeddingEntry> load_embeddings_binary(const std::filesystem::path& path,
                                                   const std::filesystem::path& ids_path) {
  static_assert(std::numeric_limits<float>::is_iec559);
  const std::string blob = read_file(path);
  if (blob.size() < 16 || std::memcmp(blob.data(), kMagic, 8) != 0) {
    throw DataError(path.string() + ": not a RAPTEMB1 file");
  }
  const auto* bytes = reinterpret_cast<const unsigned char*>(blob.data());
  const std::uint32_t count = get_u32(bytes + 8);
  const std::uint32_t dim = get_u32(bytes + 12);
  const std::uint64_t expected = 16 + std::uint64_t{count} * dim * 4;
  if (blob.size() != expected) {
    throw DataError(path.string() + ": expected " + std::to_string(expected) + " bytes for " +
                    std::to_string(count) + "x" + std::to_string(dim) + ", found " +
                    std::to_string(blob.size()));
  }

  std::vector<std::string> ids;
  const auto lines = read_lines(ids_path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].find_first_not_of(" \t") == std::string::npos) continue;
    try {
      ids.push_back(nlohmann::json::parse(lines[i]).at("id").get<std::string>());
    } catch (const nlohmann::json::exception& ex) {
      throw ParseError(ids_path.string(), i + 1, ex.what());
    }
  }
  if (ids.size() != count) {
    throw DataError(ids_path.string() + ": " + std::to_string(ids.size()) + " ids for " +
                    std::to_string(count) + " vectors");
  }

  std::vector<EmbeddingEntry> entries(count);
  const unsigned char* p = bytes + 16;
  for (std::uint32_t r = 0; r < count; ++r) {
    entries[r].id = std::move(ids[r]);
    entries[r].vector.resize(dim);
    for (std::uint32_t c = 0; c < dim; ++c, p += 4) {
      entries[r].vector[c] = static_cast<double>(std::bit_cast<float>(get_u32(p)));
    }
  }
  return entries;
}

void save_embeddings_binary(const std::filesystem::path& path, const std::filesystem::path& ids_path,
                            std::span<const EmbeddingEntry> entries) {
  check_uniform_dim(entries);
  const std::uint32_t dim = entries.empty() ? 0 : static_cast<std::uint32_t>(entries.front().vector.size());
  std::string blob(kMagic, 8);
  put_u32(blob, static_cast<std::uint32_t>(entries.size()));
  put_u32(blob, dim);
  blob.reserve(16 + entries.size() * dim * 4);
  std::string ids;
  for (const auto& e : entries) {
    for (double x : e.vector) put_u32(blob, std::bit_cast<std::uint32_t>(static_cast<float>(x)));
    ids += nlohmann::json{{"id", e.id}}.dump();
    ids += '\n';
  }
  write_file_atomic(path, blob);
  write_file_atomic(ids_path, ids);
}

}  // namespace rapt
