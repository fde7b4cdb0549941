#pragma once

#include <Eigen/Dense>
#include <array>
#include <compare>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace sck {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

// How a potential variable responds to its binary input: always 1, never 1,
// follows the input (complier), or opposes it (defier).
enum class ResponseType : std::uint8_t { kAlways = 0, kNever = 1, kComplier = 2, kDefier = 3 };

char response_code(ResponseType type) noexcept;

struct Potentials {
  int d0, d1, y0, y1;
  friend bool operator==(const Potentials&, const Potentials&) = default;
};

// One of the 16 extended principal strata: treatment response x outcome response.
class Group {
 public:
  constexpr Group(ResponseType treatment, ResponseType outcome) noexcept
      : treatment_(treatment), outcome_(outcome) {}

  // Index in table order: aa an ac af na nn nc nf ca cn cc cf fa fn fc ff.
  static constexpr int kCount = 16;
  static constexpr Group from_index(int index) noexcept {
    return {kOrder[index / 4], kOrder[index % 4]};
  }
  constexpr int index() const noexcept { return 4 * position(treatment_) + position(outcome_); }

  // Parses a two-letter code such as "cc"; throws ConfigError otherwise.
  static Group parse(std::string_view code);
  std::string code() const;

  constexpr ResponseType treatment() const noexcept { return treatment_; }
  constexpr ResponseType outcome() const noexcept { return outcome_; }

  // Allowed under treatment and outcome monotonicity: no defier component.
  constexpr bool admissible() const noexcept {
    return treatment_ != ResponseType::kDefier && outcome_ != ResponseType::kDefier;
  }

  static std::array<Group, kCount> all() noexcept;

  friend constexpr bool operator==(Group a, Group b) noexcept { return a.index() == b.index(); }
  friend constexpr auto operator<=>(Group a, Group b) noexcept { return a.index() <=> b.index(); }

 private:
  static constexpr ResponseType kOrder[4] = {ResponseType::kAlways, ResponseType::kNever,
                                             ResponseType::kComplier, ResponseType::kDefier};
  static constexpr int position(ResponseType t) noexcept {
    switch (t) {
      case ResponseType::kAlways: return 0;
      case ResponseType::kNever: return 1;
      case ResponseType::kComplier: return 2;
      case ResponseType::kDefier: return 3;
    }
    return 0;
  }

  ResponseType treatment_;
  ResponseType outcome_;
};

namespace groups {
inline constexpr Group aa{ResponseType::kAlways, ResponseType::kAlways};
inline constexpr Group an{ResponseType::kAlways, ResponseType::kNever};
inline constexpr Group ac{ResponseType::kAlways, ResponseType::kComplier};
inline constexpr Group af{ResponseType::kAlways, ResponseType::kDefier};
inline constexpr Group na{ResponseType::kNever, ResponseType::kAlways};
inline constexpr Group nn{ResponseType::kNever, ResponseType::kNever};
inline constexpr Group nc{ResponseType::kNever, ResponseType::kComplier};
inline constexpr Group nf{ResponseType::kNever, ResponseType::kDefier};
inline constexpr Group ca{ResponseType::kComplier, ResponseType::kAlways};
inline constexpr Group cn{ResponseType::kComplier, ResponseType::kNever};
inline constexpr Group cc{ResponseType::kComplier, ResponseType::kComplier};
inline constexpr Group cf{ResponseType::kComplier, ResponseType::kDefier};
inline constexpr Group fa{ResponseType::kDefier, ResponseType::kAlways};
inline constexpr Group fn{ResponseType::kDefier, ResponseType::kNever};
inline constexpr Group fc{ResponseType::kDefier, ResponseType::kComplier};
inline constexpr Group ff{ResponseType::kDefier, ResponseType::kDefier};
}  // namespace groups

// (D0, D1, Y0, Y1) of a group.
Potentials group_to_potentials(Group g) noexcept;

// Realized treatment under assignment z and realized outcome under treatment d.
int treatment_under(Group g, int z) noexcept;
int outcome_under(Group g, int d) noexcept;

// Latent subpopulation targeted by a characteristics estimator.
enum class Target { kPopulation, kComplier, kSupercomplier, kCa, kCn };

std::string_view target_name(Target t) noexcept;
Target parse_target(std::string_view name);
inline constexpr std::array<Target, 5> kAllTargets = {Target::kPopulation, Target::kComplier,
                                                      Target::kSupercomplier, Target::kCa,
                                                      Target::kCn};

// Categorical column: dense codes 0..k-1 with their labels, in first-seen order.
struct Categorical {
  std::vector<int> codes;
  std::vector<std::string> labels;

  Index levels() const noexcept { return static_cast<Index>(labels.size()); }
  static Categorical from_labels(const std::vector<std::string>& values);
};

// Validated rectangular dataset consumed by every estimator. Immutable after
// construction; copies share storage.
class ObservationTable {
 public:
  struct Columns {
    VectorXd z;
    VectorXd d;
    VectorXd y;
    MatrixXd x;  // n x covariate_names.size()
    std::vector<std::string> covariate_names;
    std::optional<Categorical> stratum;
    std::optional<Categorical> cluster;
    std::map<std::string, Categorical> categoricals;
    bool y_binary = true;
  };

  // Validates every invariant and throws DataError on the first violation.
  static ObservationTable create(Columns columns);

  Index n() const noexcept { return data_->z.size(); }
  const VectorXd& z() const noexcept { return data_->z; }
  const VectorXd& d() const noexcept { return data_->d; }
  const VectorXd& y() const noexcept { return data_->y; }
  const MatrixXd& x() const noexcept { return data_->x; }
  const std::vector<std::string>& covariate_names() const noexcept { return data_->covariate_names; }
  bool y_binary() const noexcept { return data_->y_binary; }
  const std::optional<Categorical>& stratum() const noexcept { return data_->stratum; }
  const std::optional<Categorical>& cluster() const noexcept { return data_->cluster; }
  const std::map<std::string, Categorical>& categoricals() const noexcept {
    return data_->categoricals;
  }

  bool has_covariate(std::string_view name) const noexcept;
  VectorXd covariate(std::string_view name) const;
  const Categorical& categorical(std::string_view name) const;

  Index treated_count() const noexcept;
  double treated_share() const noexcept { return static_cast<double>(treated_count()) / n(); }

  // Row subset in the given order (rows may repeat).
  ObservationTable subset(const std::vector<Index>& rows) const;
  // Row-wise concatenation; covariate names and flags must match.
  static ObservationTable concat(const std::vector<ObservationTable>& parts);

 private:
  explicit ObservationTable(std::shared_ptr<const Columns> data) : data_(std::move(data)) {}
  std::shared_ptr<const Columns> data_;
};

// Logical-to-physical column mapping plus interpretation flags.
struct ColumnMapping {
  std::string z = "z";
  std::string d = "d";
  std::string y = "y";
  std::vector<std::string> covariates;
  std::optional<std::string> stratum;
  std::optional<std::string> cluster;
  std::vector<std::string> extra_categoricals;
  bool y_binary = true;
  std::optional<double> tau_known;
};

ColumnMapping parse_mapping(std::string_view json_text);
ColumnMapping load_mapping(const std::string& path);

// Reads a UTF-8 comma-separated file with a header row.
ObservationTable load_observations(std::istream& source, const ColumnMapping& mapping);
ObservationTable load_observations_file(const std::string& path, const ColumnMapping& mapping);

// Writes the table using the standard column names z,d,y,<covariates>[,stratum][,cluster].
void write_csv(std::ostream& out, const ObservationTable& table);

}  // namespace sck
