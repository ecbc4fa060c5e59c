#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string_view>

namespace ids {

// The five traffic classes, in the fixed order used by every matrix and report.
enum class ClassLabel : unsigned char { Normal = 0, Probe = 1, DoS = 2, U2R = 3, R2L = 4 };

inline constexpr std::size_t kNumClasses = 5;

inline constexpr std::array<ClassLabel, kNumClasses> kAllClasses = {
    ClassLabel::Normal, ClassLabel::Probe, ClassLabel::DoS, ClassLabel::U2R, ClassLabel::R2L};

constexpr std::size_t index_of(ClassLabel c) noexcept { return static_cast<std::size_t>(c); }

constexpr ClassLabel label_at(std::size_t i) noexcept { return static_cast<ClassLabel>(i); }

constexpr std::string_view name_of(ClassLabel c) noexcept {
  constexpr std::array<std::string_view, kNumClasses> names = {"Normal", "Probe", "DoS", "U2R", "R2L"};
  return names[index_of(c)];
}

inline std::optional<ClassLabel> label_from_name(std::string_view s) {
  for (ClassLabel c : kAllClasses) {
    if (name_of(c) == s) return c;
  }
  return std::nullopt;
}

namespace detail {

struct AttackCategory {
  std::string_view name;
  ClassLabel label;
};

// All 39 KDD99 attack names (22 from the training file, 17 appearing only in
// the labeled test file) plus "normal".
inline constexpr std::array<AttackCategory, 40> kAttackTable = {{
    {"normal", ClassLabel::Normal},
    // DoS
    {"back", ClassLabel::DoS},
    {"land", ClassLabel::DoS},
    {"neptune", ClassLabel::DoS},
    {"pod", ClassLabel::DoS},
    {"smurf", ClassLabel::DoS},
    {"teardrop", ClassLabel::DoS},
    {"apache2", ClassLabel::DoS},
    {"mailbomb", ClassLabel::DoS},
    {"processtable", ClassLabel::DoS},
    {"udpstorm", ClassLabel::DoS},
    // Probe
    {"ipsweep", ClassLabel::Probe},
    {"nmap", ClassLabel::Probe},
    {"portsweep", ClassLabel::Probe},
    {"satan", ClassLabel::Probe},
    {"mscan", ClassLabel::Probe},
    {"saint", ClassLabel::Probe},
    // R2L
    {"ftp_write", ClassLabel::R2L},
    {"guess_passwd", ClassLabel::R2L},
    {"imap", ClassLabel::R2L},
    {"multihop", ClassLabel::R2L},
    {"phf", ClassLabel::R2L},
    {"spy", ClassLabel::R2L},
    {"warezclient", ClassLabel::R2L},
    {"warezmaster", ClassLabel::R2L},
    {"named", ClassLabel::R2L},
    {"sendmail", ClassLabel::R2L},
    {"snmpgetattack", ClassLabel::R2L},
    {"snmpguess", ClassLabel::R2L},
    {"xlock", ClassLabel::R2L},
    {"xsnoop", ClassLabel::R2L},
    {"worm", ClassLabel::R2L},
    // U2R
    {"buffer_overflow", ClassLabel::U2R},
    {"loadmodule", ClassLabel::U2R},
    {"perl", ClassLabel::U2R},
    {"rootkit", ClassLabel::U2R},
    {"httptunnel", ClassLabel::U2R},
    {"ps", ClassLabel::U2R},
    {"sqlattack", ClassLabel::U2R},
    {"xterm", ClassLabel::U2R},
}};

}  // namespace detail

// Folds a KDD99 label token ("smurf." or "smurf") into its class.
inline std::optional<ClassLabel> category_of_attack(std::string_view token) {
  if (!token.empty() && token.back() == '.') token.remove_suffix(1);
  for (const auto& entry : detail::kAttackTable) {
    if (entry.name == token) return entry.label;
  }
  return std::nullopt;
}

}  // namespace ids
