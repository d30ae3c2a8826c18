#include "asvlab/checkpoint.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <tuple>
#include <vector>

#include "asvlab/batch.hpp"  // fnv1a

namespace asv {

namespace {

constexpr const char* kMagic = "asvlab-checkpoint 1";

void put_f32_le(std::string& out, float f) {
  std::uint32_t bits;
  std::memcpy(&bits, &f, 4);
  out.push_back(static_cast<char>(bits & 0xff));
  out.push_back(static_cast<char>((bits >> 8) & 0xff));
  out.push_back(static_cast<char>((bits >> 16) & 0xff));
  out.push_back(static_cast<char>((bits >> 24) & 0xff));
}

float get_f32_le(const unsigned char* p) {
  const std::uint32_t bits =
      static_cast<std::uint32_t>(p[0]) |
      (static_cast<std::uint32_t>(p[1]) << 8) |
      (static_cast<std::uint32_t>(p[2]) << 16) |
      (static_cast<std::uint32_t>(p[3]) << 24);
  float f;
  std::memcpy(&f, &bits, 4);
  return f;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

void save_checkpoint(const Net& net, const CheckpointMeta& meta,
                     const std::filesystem::path& path) {
  std::string payload;
  payload.reserve(static_cast<std::size_t>(net.theta.size()) * 4);
  for (const auto& b : net.blocks()) {
    Net::CMapMat m(net.theta.data() + b.offset, b.rows, b.cols);
    for (Eigen::Index r = 0; r < b.rows; ++r)
      for (Eigen::Index c = 0; c < b.cols; ++c)
        put_f32_le(payload, static_cast<float>(m(r, c)));
  }

  std::ostringstream header;
  header << kMagic << "\n";
  header << "obs_dim " << net.obs_dim() << "\n";
  header << "act_dim " << net.act_dim() << "\n";
  header << "hidden " << net.hidden() << "\n";
  header << "iteration " << meta.iteration << "\n";
  header << "config_hash " << hex64(meta.config_hash) << "\n";
  header << "blocks " << net.blocks().size() << "\n";
  for (const auto& b : net.blocks())
    header << "block " << b.name << " " << b.rows << " " << b.cols << "\n";
  header << "payload_bytes " << payload.size() << "\n";
  header << "payload_fnv " << hex64(fnv1a(payload.data(), payload.size()))
         << "\n";
  header << "data\n";

  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw CheckpointError("cannot write checkpoint " + path.string());
  out << header.str();
  out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
  if (!out.flush())
    throw CheckpointError("short write to " + path.string());
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw CheckpointError("cannot open checkpoint " + path.string());

  auto bad = [&](const std::string& msg) -> CheckpointError {
    return CheckpointError(path.string() + ": " + msg);
  };

  std::string line;
  if (!std::getline(in, line) || line != kMagic)
    throw bad("not a checkpoint file (bad magic)");

  int obs_dim = -1, act_dim = -1, hidden = -1, iteration = -1;
  std::uint64_t config_hash = 0, payload_fnv = 0;
  std::size_t n_blocks = 0, payload_bytes = 0;
  std::vector<std::tuple<std::string, Eigen::Index, Eigen::Index>> blocks;
  bool saw_data = false;

  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "data") {
      saw_data = true;
      break;
    } else if (key == "obs_dim") {
      ls >> obs_dim;
    } else if (key == "act_dim") {
      ls >> act_dim;
    } else if (key == "hidden") {
      ls >> hidden;
    } else if (key == "iteration") {
      ls >> iteration;
    } else if (key == "config_hash") {
      ls >> std::hex >> config_hash;
    } else if (key == "payload_fnv") {
      ls >> std::hex >> payload_fnv;
    } else if (key == "blocks") {
      ls >> n_blocks;
    } else if (key == "block") {
      std::string name;
      Eigen::Index r = 0, c = 0;
      ls >> name >> r >> c;
      blocks.emplace_back(name, r, c);
    } else if (key == "payload_bytes") {
      ls >> payload_bytes;
    } else {
      throw bad("unknown header field '" + key + "'");
    }
    if (ls.fail()) throw bad("malformed header line '" + line + "'");
  }
  if (!saw_data) throw bad("header ends without a data section");
  if (obs_dim < 1 || act_dim < 1 || hidden < 1)
    throw bad("missing or invalid dimensions");
  if (blocks.size() != n_blocks)
    throw bad("block table length disagrees with 'blocks' field");

  LoadedCheckpoint out{Net(obs_dim, act_dim, hidden),
                       {config_hash, iteration}};

  const auto& expect = out.net.blocks();
  if (blocks.size() != expect.size())
    throw bad("unexpected block count for these dimensions");
  std::size_t want_bytes = 0;
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const auto& [name, r, c] = blocks[i];
    if (name != expect[i].name || r != expect[i].rows ||
        c != expect[i].cols)
      throw bad("block '" + name + "' does not match the declared shape");
    want_bytes += static_cast<std::size_t>(r * c) * 4;
  }
  if (payload_bytes != want_bytes)
    throw bad("payload_bytes disagrees with the block table");

  std::string payload(payload_bytes, '\0');
  in.read(payload.data(), static_cast<std::streamsize>(payload_bytes));
  if (static_cast<std::size_t>(in.gcount()) != payload_bytes)
    throw bad("short payload");
  if (fnv1a(payload.data(), payload.size()) != payload_fnv)
    throw bad("payload checksum mismatch");

  const auto* p = reinterpret_cast<const unsigned char*>(payload.data());
  for (const auto& b : expect) {
    Net::MapMat m(out.net.theta.data() + b.offset, b.rows, b.cols);
    for (Eigen::Index r = 0; r < b.rows; ++r)
      for (Eigen::Index c = 0; c < b.cols; ++c) {
        m(r, c) = static_cast<double>(get_f32_le(p));
        p += 4;
      }
  }
  return out;
}

void require_dims(const LoadedCheckpoint& ckpt, int obs_dim, int act_dim) {
  if (ckpt.net.obs_dim() != obs_dim || ckpt.net.act_dim() != act_dim)
    throw CheckpointError(
        "checkpoint network is " + std::to_string(ckpt.net.obs_dim()) + "x" +
        std::to_string(ckpt.net.act_dim()) + " (obs x act) but this task is " +
        std::to_string(obs_dim) + "x" + std::to_string(act_dim));
}

}  // namespace asv
