#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace adequacy {

enum class Sector { agriculture, services, households, industry, transport };
enum class Carrier { electricity, hydrogen };
enum class TechKind { generator, converter, storage };

inline constexpr std::size_t kSectorCount = 5;
inline constexpr std::size_t kCarrierCount = 2;

inline constexpr std::array<Sector, kSectorCount> kSectors{
    Sector::agriculture, Sector::services, Sector::households, Sector::industry,
    Sector::transport};
inline constexpr std::array<Carrier, kCarrierCount> kCarriers{Carrier::electricity,
                                                              Carrier::hydrogen};

template <typename T>
using SectorMap = std::array<T, kSectorCount>;

constexpr std::size_t index_of(Sector s) { return static_cast<std::size_t>(s); }
constexpr std::size_t index_of(Carrier c) { return static_cast<std::size_t>(c); }

constexpr std::string_view to_string(Sector s) {
  switch (s) {
    case Sector::agriculture: return "agriculture";
    case Sector::services: return "services";
    case Sector::households: return "households";
    case Sector::industry: return "industry";
    case Sector::transport: return "transport";
  }
  return "?";
}

constexpr std::string_view to_string(Carrier c) {
  return c == Carrier::electricity ? "electricity" : "hydrogen";
}

constexpr std::string_view to_string(TechKind k) {
  switch (k) {
    case TechKind::generator: return "generator";
    case TechKind::converter: return "converter";
    case TechKind::storage: return "storage";
  }
  return "?";
}

// Two-letter tag used in LP column and row names.
constexpr std::string_view short_name(Carrier c) {
  return c == Carrier::electricity ? "el" : "h2";
}

inline std::optional<Sector> parse_sector(std::string_view s) {
  for (Sector sec : kSectors)
    if (to_string(sec) == s) return sec;
  return std::nullopt;
}

inline std::optional<Carrier> parse_carrier(std::string_view s) {
  if (s == "electricity" || s == "el") return Carrier::electricity;
  if (s == "hydrogen" || s == "h2") return Carrier::hydrogen;
  return std::nullopt;
}

inline std::optional<TechKind> parse_tech_kind(std::string_view s) {
  if (s == "generator") return TechKind::generator;
  if (s == "converter") return TechKind::converter;
  if (s == "storage") return TechKind::storage;
  return std::nullopt;
}

// Raised for malformed user input: missing files, bad columns, dangling ids,
// unparsable numbers. The message carries file, line and column.
class InputError : public std::runtime_error {
 public:
  InputError(std::string file, std::size_t line, std::string column, const std::string& what)
      : std::runtime_error(compose(file, line, column, what)),
        file_(std::move(file)),
        line_(line),
        column_(std::move(column)) {}

  explicit InputError(const std::string& what) : std::runtime_error(what) {}

  const std::string& file() const noexcept { return file_; }
  std::size_t line() const noexcept { return line_; }
  const std::string& column() const noexcept { return column_; }

 private:
  static std::string compose(const std::string& file, std::size_t line,
                             const std::string& column, const std::string& what) {
    std::string msg = file;
    if (line > 0) msg += ":" + std::to_string(line);
    if (!column.empty()) msg += ": column '" + column + "'";
    msg += ": " + what;
    return msg;
  }

  std::string file_;
  std::size_t line_ = 0;
  std::string column_;
};

// Raised when the filesystem refuses a read or write.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace adequacy
