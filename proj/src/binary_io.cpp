// Copyright 2026-present the patsim project
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "patsim/binary_io.hpp"

#include <zlib.h>

#include <fstream>
#include <limits>

namespace patsim {

std::uint32_t crc32(std::span<const std::uint8_t> bytes) {
  uLong crc = ::crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed large buffers in slices.
  std::size_t off = 0;
  while (off < bytes.size()) {
    const std::size_t n = std::min<std::size_t>(bytes.size() - off, 1u << 30);
    crc = ::crc32(crc, bytes.data() + off, static_cast<uInt>(n));
    off += n;
  }
  return static_cast<std::uint32_t>(crc);
}

void ByteWriter::put_string16(std::string_view s) {
  if (s.size() > std::numeric_limits<std::uint16_t>::max()) {
    throw Error("string too long for 16-bit length prefix: " +
                std::string(s.substr(0, 32)) + "...");
  }
  put_u16(static_cast<std::uint16_t>(s.size()));
  put_bytes(s.data(), s.size());
}

void ByteWriter::write_file(const std::filesystem::path &path) const {
  write_file_bytes(path, buf_);
}

void write_file_bytes(const std::filesystem::path &path,
                      std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open for writing: " + path.string());
  out.write(reinterpret_cast<const char *>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("write failed: " + path.string());
}

std::string ByteReader::get_string(std::size_t n) {
  require(n);
  std::string s(reinterpret_cast<const char *>(bytes_.data() + pos_), n);
  pos_ += n;
  return s;
}

void ByteReader::get_bytes(void *out, std::size_t n) {
  require(n);
  std::memcpy(out, bytes_.data() + pos_, n);
  pos_ += n;
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open file: " + path.string());
  in.seekg(0, std::ios::end);
  const auto size = static_cast<std::size_t>(in.tellg());
  in.seekg(0, std::ios::beg);
  std::vector<std::uint8_t> bytes(size);
  in.read(reinterpret_cast<char *>(bytes.data()),
          static_cast<std::streamsize>(size));
  if (!in) throw Error("read failed: " + path.string());
  return bytes;
}

void verify_trailer(std::span<const std::uint8_t> file, ByteReader &reader) {
  const std::size_t payload_end = reader.position();
  const std::uint32_t stored = reader.get_u32();
  if (reader.remaining() != 0) throw Error("corrupt file: trailing bytes");
  if (crc32(file.first(payload_end)) != stored) {
    throw Error("checksum mismatch");
  }
}

}  // namespace patsim
