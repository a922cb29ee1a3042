#include "ssar/numeric/binary_io.hpp"

#include <fstream>
#include <iterator>

#include "ssar/error.hpp"

namespace ssar::io {

void ByteWriter::write_file(const std::filesystem::path& path) const {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("io_error", "cannot open file for writing", {{"path", path.string()}});
  out.write(reinterpret_cast<const char*>(buf_.data()), static_cast<std::streamsize>(buf_.size()));
  if (!out) throw Error("io_error", "write failed", {{"path", path.string()}});
}

ByteReader ByteReader::from_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UserError("file_not_found", "cannot open file", {{"path", path.string()}});
  std::vector<unsigned char> data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return ByteReader(std::move(data));
}

void ByteReader::require(std::size_t n) const {
  if (remaining() < n)
    throw Error("truncated", "file ends early: expected " + std::to_string(offset_ + n) +
                                 " bytes but only " + std::to_string(data_.size()) + " are present",
                {{"offset", std::to_string(offset_)},
                 {"expected_bytes", std::to_string(offset_ + n)},
                 {"actual_bytes", std::to_string(data_.size())}});
}

std::string ByteReader::text(std::size_t n) {
  require(n);
  std::string s(reinterpret_cast<const char*>(data_.data() + offset_), n);
  offset_ += n;
  return s;
}

}  // namespace ssar::io
