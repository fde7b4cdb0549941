#pragma once

#include <cstdint>
#include <json.hpp>
#include <string>
#include <string_view>
#include <vector>

#include "sck/assumption_tests.hpp"
#include "sck/dgp_oracle.hpp"
#include "sck/identification.hpp"

namespace sck::report {

inline constexpr std::string_view kSchema = "sck.report/1";
inline constexpr std::string_view kVersion = "0.1.0";

using Json = nlohmann::ordered_json;

// FNV-1a 64-bit, rendered as 16 hex digits.
std::string fnv1a64(std::string_view bytes);

// Insertion-ordered, duplicate-free warning list.
class Warnings {
 public:
  void add(const std::string& message);
  void add_all(const std::vector<std::string>& messages);
  const std::vector<std::string>& items() const noexcept { return items_; }

 private:
  std::vector<std::string> items_;
};

Json to_json(const ident::WaldEstimate& w);
Json to_json(const assumptions::SharpTestResult& r);
Json to_json(const assumptions::OmTestResult& r);
Json to_json(const regression::ArConfidenceSet& ar);
Json to_json(const ident::QuantileEstimate& q);
Json to_json(const ident::StratifiedEstimate& s);

// A finished report: JSON document plus its fixed-width text rendering.
struct Report {
  Json doc;
  std::string text;
};

Json metadata(std::string_view command, const std::string& input_hash, const Json& config,
              std::optional<std::uint64_t> seed, Index n);

// Text renderers for the individual sections.
std::string format_number(double v, int precision = 4);
std::string render_shares(const ident::GroupSummary& s);
std::string render_characteristics(const ident::GroupSummary& s);
std::string render_test(const std::string& title, const assumptions::SharpTestResult& r);
std::string render_warnings(const Warnings& w);

// Writes <dir>/report.txt and <dir>/report.json, creating dir if needed.
void write_report(const Report& report, const std::string& dir);

}  // namespace sck::report
