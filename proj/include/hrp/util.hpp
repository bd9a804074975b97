#pragma once

#include <cstdint>
#include <string>

namespace hrp {

// Shortest decimal representation that round-trips to the same double.
std::string fmt_double(double v);

double parse_double(const std::string& token, bool& ok);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

// FNV-1a over raw file bytes, hex encoded; used for manifest bookkeeping.
std::string file_checksum(const std::string& path);

} // namespace hrp
