#pragma once

#include <string>

namespace sfde::io {

// 17 significant digits: the shortest width that round-trips every double.
std::string format_float(double v);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace sfde::io
