#ifndef SHEAF_GOODWIN_IO_FORMAT_HPP
#define SHEAF_GOODWIN_IO_FORMAT_HPP

#include <charconv>
#include <string>
#include <system_error>

namespace sheaf_goodwin {

/// Locale-independent %.<digits>g rendering.
inline std::string format_double(double x, int digits = 17) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, digits);
  if (res.ec != std::errc{}) return "nan";
  return std::string(buf, res.ptr);
}

} // namespace sheaf_goodwin

#endif // SHEAF_GOODWIN_IO_FORMAT_HPP
