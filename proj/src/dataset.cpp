#include "nav/distill.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cstring>

namespace nav {

namespace {

// Header layout (52 bytes):
//   magic[8] | version u32 | H u32 | W u32 | record_count u64 |
//   episode_count u64 | config_hash u64 | max_depth f64
constexpr size_t kHeaderBytes = 52;
// Episode table entry (24 bytes):
//   episode_id u32 | outcome u8 | pad[3] | first_record u64 | length u32 | pad u32
constexpr size_t kEpisodeBytes = 24;

size_t record_size(int height, int width) {
  return 8 + size_t(kProprioDim) * 4 + 12 + size_t(4) * height * width * 2;
}

}  // namespace

DatasetWriter::DatasetWriter(const std::string& path, int height, int width,
                             uint64_t config_hash, double max_depth)
    : path_(path),
      height_(height),
      width_(width),
      config_hash_(config_hash),
      max_depth_(max_depth),
      record_bytes_(record_size(height, width)) {
  f_ = std::fopen(path.c_str(), "wb");
  if (!f_) throw std::runtime_error("cannot write dataset file " + path);
  // Placeholder header; rewritten with final counts on close.
  std::vector<uint8_t> zero(kHeaderBytes, 0);
  std::fwrite(zero.data(), 1, kHeaderBytes, f_);
}

DatasetWriter::~DatasetWriter() {
  if (f_) close();
}

void DatasetWriter::begin_episode() {
  if (episode_open_) throw std::runtime_error("DatasetWriter: episode already open");
  pending_.clear();
  pending_steps_ = 0;
  episode_open_ = true;
}

void DatasetWriter::add_step(const float* proprio, const float* action, const uint16_t* depth) {
  if (!episode_open_) throw std::runtime_error("DatasetWriter: no open episode");
  size_t base = pending_.size();
  pending_.resize(base + record_bytes_);
  uint8_t* p = pending_.data() + base;
  uint32_t episode_id = uint32_t(episodes_.size());
  std::memcpy(p, &episode_id, 4);
  std::memcpy(p + 4, &pending_steps_, 4);
  std::memcpy(p + 8, proprio, size_t(kProprioDim) * 4);
  std::memcpy(p + 8 + kProprioDim * 4, action, 12);
  std::memcpy(p + 20 + kProprioDim * 4, depth, size_t(4) * height_ * width_ * 2);
  pending_steps_ += 1;
}

void DatasetWriter::commit_episode() {
  if (!episode_open_) throw std::runtime_error("DatasetWriter: no open episode");
  if (std::fwrite(pending_.data(), 1, pending_.size(), f_) != pending_.size()) {
    throw std::runtime_error("dataset write failed: " + path_);
  }
  EpisodeInfo ep;
  ep.episode_id = uint32_t(episodes_.size());
  ep.outcome = Outcome::success;
  ep.first_record = record_count_;
  ep.length = pending_steps_;
  episodes_.push_back(ep);
  record_count_ += pending_steps_;
  episode_open_ = false;
}

void DatasetWriter::discard_episode() {
  pending_.clear();
  pending_steps_ = 0;
  episode_open_ = false;
}

void DatasetWriter::close() {
  if (!f_) return;
  // Episode table after the records.
  for (const auto& ep : episodes_) {
    uint8_t entry[kEpisodeBytes] = {0};
    std::memcpy(entry, &ep.episode_id, 4);
    entry[4] = uint8_t(ep.outcome);
    std::memcpy(entry + 8, &ep.first_record, 8);
    std::memcpy(entry + 16, &ep.length, 4);
    std::fwrite(entry, 1, kEpisodeBytes, f_);
  }
  // Final header.
  uint8_t header[kHeaderBytes] = {0};
  std::memcpy(header, kDatasetMagic, 8);
  uint32_t version = kDatasetVersion, h = uint32_t(height_), w = uint32_t(width_);
  std::memcpy(header + 8, &version, 4);
  std::memcpy(header + 12, &h, 4);
  std::memcpy(header + 16, &w, 4);
  std::memcpy(header + 20, &record_count_, 8);
  uint64_t ep_count = episodes_.size();
  std::memcpy(header + 28, &ep_count, 8);
  std::memcpy(header + 36, &config_hash_, 8);
  std::memcpy(header + 44, &max_depth_, 8);
  std::fseek(f_, 0, SEEK_SET);
  std::fwrite(header, 1, kHeaderBytes, f_);
  if (std::fclose(f_) != 0) throw std::runtime_error("dataset close failed: " + path_);
  f_ = nullptr;
}

DatasetReader::DatasetReader(const std::string& path) : path_(path) {
  fd_ = ::open(path.c_str(), O_RDONLY);
  if (fd_ < 0) throw std::runtime_error("cannot open dataset file " + path);
  uint8_t header[kHeaderBytes];
  if (::pread(fd_, header, kHeaderBytes, 0) != ssize_t(kHeaderBytes)) {
    throw std::runtime_error("dataset format error: truncated header in " + path);
  }
  if (std::memcmp(header, kDatasetMagic, 8) != 0) {
    throw std::runtime_error("not a demo dataset file: " + path);
  }
  uint32_t version, h, w;
  std::memcpy(&version, header + 8, 4);
  if (version != kDatasetVersion) throw std::runtime_error("unsupported dataset version");
  std::memcpy(&h, header + 12, 4);
  std::memcpy(&w, header + 16, 4);
  height_ = int(h);
  width_ = int(w);
  std::memcpy(&record_count_, header + 20, 8);
  uint64_t ep_count;
  std::memcpy(&ep_count, header + 28, 8);
  std::memcpy(&config_hash_, header + 36, 8);
  std::memcpy(&max_depth_, header + 44, 8);
  record_bytes_ = record_size(height_, width_);

  uint64_t table_off = kHeaderBytes + record_count_ * record_bytes_;
  episodes_.resize(ep_count);
  for (uint64_t i = 0; i < ep_count; ++i) {
    uint8_t entry[kEpisodeBytes];
    if (::pread(fd_, entry, kEpisodeBytes, off_t(table_off + i * kEpisodeBytes)) !=
        ssize_t(kEpisodeBytes)) {
      throw std::runtime_error("dataset format error: truncated episode table entry " +
                               std::to_string(i) + " in " + path);
    }
    EpisodeInfo& ep = episodes_[i];
    std::memcpy(&ep.episode_id, entry, 4);
    ep.outcome = Outcome(entry[4]);
    std::memcpy(&ep.first_record, entry + 8, 8);
    std::memcpy(&ep.length, entry + 16, 4);
  }
}

DatasetReader::~DatasetReader() {
  if (fd_ >= 0) ::close(fd_);
}

void DatasetReader::read_record(uint64_t index, DemoRecord& out) const {
  if (index >= record_count_) {
    throw std::runtime_error("dataset record " + std::to_string(index) + " out of range (" +
                             std::to_string(record_count_) + " records)");
  }
  std::vector<uint8_t> buf(record_bytes_);
  off_t off = off_t(kHeaderBytes + index * record_bytes_);
  if (::pread(fd_, buf.data(), record_bytes_, off) != ssize_t(record_bytes_)) {
    throw std::runtime_error("dataset format error: truncated record " + std::to_string(index) +
                             " at byte offset " + std::to_string(off) + " in " + path_);
  }
  std::memcpy(&out.episode_id, buf.data(), 4);
  std::memcpy(&out.step_index, buf.data() + 4, 4);
  std::memcpy(out.proprio, buf.data() + 8, size_t(kProprioDim) * 4);
  std::memcpy(out.action, buf.data() + 8 + kProprioDim * 4, 12);
  size_t n = size_t(4) * height_ * width_;
  out.depth.resize(n);
  std::memcpy(out.depth.data(), buf.data() + 20 + kProprioDim * 4, n * 2);
}

}  // namespace nav
