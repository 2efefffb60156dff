#include <algorithm>
#include <charconv>
#include <fstream>
#include <iostream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

#include "fgbench/environments.hpp"
#include "fgbench/errors.hpp"

namespace fgbench {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\"");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\"");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split(const std::string& line, char delim) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, delim)) out.push_back(trim(field));
  if (!line.empty() && line.back() == delim) out.emplace_back();
  return out;
}

bool parse_double(const std::string& s, double& value) {
  if (s.empty()) return false;
  const char* begin = s.data();
  if (*begin == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, s.data() + s.size(), value);
  return ec == std::errc() && ptr == s.data() + s.size();
}

// Numeric labels sort by value, anything else lexicographically.
std::vector<std::string> sorted_labels(const std::set<std::string>& labels) {
  std::vector<std::string> out(labels.begin(), labels.end());
  const bool numeric = std::all_of(out.begin(), out.end(), [](const std::string& s) {
    double v;
    return parse_double(s, v);
  });
  if (numeric) {
    std::sort(out.begin(), out.end(), [](const std::string& a, const std::string& b) {
      double x = 0, y = 0;
      parse_double(a, x);
      parse_double(b, y);
      return x < y;
    });
  }
  return out;
}

ColumnRole parse_role(const std::string& token) {
  static const std::map<std::string, ColumnRole> roles = {
      {"num", ColumnRole::kNumeric},     {"numeric", ColumnRole::kNumeric},
      {"cat", ColumnRole::kCategorical}, {"categorical", ColumnRole::kCategorical},
      {"label", ColumnRole::kLabel},     {"reward", ColumnRole::kArmReward},
      {"arm-reward", ColumnRole::kArmReward}, {"ignore", ColumnRole::kIgnore},
      {"skip", ColumnRole::kIgnore}};
  const auto it = roles.find(token);
  if (it == roles.end()) throw SchemaError("unknown column role '" + token + "'");
  return it->second;
}

}  // namespace

std::vector<ColumnRole> parse_column_roles(const std::string& spec) {
  std::vector<ColumnRole> out;
  for (const auto& raw : split(spec, ',')) {
    if (raw.empty()) continue;
    const auto star = raw.find('*');
    std::size_t repeat = 1;
    std::string name = raw;
    if (star != std::string::npos) {
      name = trim(raw.substr(0, star));
      double n = 0;
      if (!parse_double(trim(raw.substr(star + 1)), n) || n < 1 || n != std::floor(n)) {
        throw SchemaError("bad repeat count in column role '" + raw + "'");
      }
      repeat = static_cast<std::size_t>(n);
    }
    const ColumnRole role = parse_role(name);
    out.insert(out.end(), repeat, role);
  }
  if (out.empty()) throw SchemaError("empty column role list");
  return out;
}

DatasetTable parse_dataset(std::istream& in, const DatasetSchema& schema) {
  const auto& roles = schema.columns;
  const auto n_label = std::count(roles.begin(), roles.end(), ColumnRole::kLabel);
  const auto n_reward = std::count(roles.begin(), roles.end(), ColumnRole::kArmReward);
  if (n_label > 1) throw SchemaError("schema declares more than one label column");
  if (n_label == 1 && n_reward > 0) {
    throw SchemaError("schema mixes a label column with arm-reward columns");
  }
  if (n_label == 0 && n_reward == 0) throw SchemaError("schema has neither label nor arm-reward columns");
  if (schema.scheme == RewardScheme::kMushroom && n_label != 1) {
    throw SchemaError("mushroom reward scheme requires a label column");
  }

  std::vector<std::vector<std::string>> records;
  std::vector<std::size_t> line_numbers;
  std::string line;
  std::size_t line_no = 0;
  bool skipped_header = !schema.header;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    if (!skipped_header) {
      skipped_header = true;
      continue;
    }
    auto fields = split(line, schema.delimiter);
    if (fields.size() != roles.size()) {
      throw SchemaError("line " + std::to_string(line_no) + ": expected " +
                        std::to_string(roles.size()) + " columns, found " +
                        std::to_string(fields.size()));
    }
    records.push_back(std::move(fields));
    line_numbers.push_back(line_no);
  }
  if (records.empty()) throw SchemaError("dataset contains no records");

  // Category vocabularies and feature layout.
  std::vector<std::vector<std::string>> vocab(roles.size());
  std::set<std::string> label_set;
  for (std::size_t c = 0; c < roles.size(); ++c) {
    if (roles[c] == ColumnRole::kCategorical) {
      std::set<std::string> values;
      for (const auto& r : records) values.insert(r[c]);
      vocab[c].assign(values.begin(), values.end());
    } else if (roles[c] == ColumnRole::kLabel) {
      for (const auto& r : records) label_set.insert(r[c]);
    }
  }
  Eigen::Index d = 0;
  std::vector<Eigen::Index> offset(roles.size(), -1);
  for (std::size_t c = 0; c < roles.size(); ++c) {
    if (roles[c] == ColumnRole::kNumeric) {
      offset[c] = d++;
    } else if (roles[c] == ColumnRole::kCategorical) {
      offset[c] = d;
      d += static_cast<Eigen::Index>(vocab[c].size());
    }
  }
  if (d == 0) throw SchemaError("schema declares no feature columns");

  DatasetTable table;
  table.scheme = schema.scheme;
  std::map<std::string, Eigen::Index> label_index;
  Eigen::Index n_arms = 0;
  if (schema.scheme == RewardScheme::kMushroom) {
    table.arm_labels = {"eat", "abstain"};
    n_arms = 2;
  } else if (n_label == 1) {
    table.arm_labels = sorted_labels(label_set);
    for (std::size_t i = 0; i < table.arm_labels.size(); ++i) {
      label_index[table.arm_labels[i]] = static_cast<Eigen::Index>(i);
    }
    n_arms = static_cast<Eigen::Index>(table.arm_labels.size());
  } else {
    n_arms = static_cast<Eigen::Index>(n_reward);
    for (Eigen::Index i = 0; i < n_arms; ++i) table.arm_labels.push_back("arm" + std::to_string(i));
  }

  const auto n_rows = static_cast<Eigen::Index>(records.size());
  table.features = Eigen::MatrixXd::Zero(n_rows, d);
  table.mean_rewards = Eigen::MatrixXd::Zero(n_rows, n_arms);
  if (schema.scheme == RewardScheme::kMushroom) table.poisonous.assign(records.size(), 0);

  for (Eigen::Index i = 0; i < n_rows; ++i) {
    const auto& rec = records[static_cast<std::size_t>(i)];
    const std::size_t ln = line_numbers[static_cast<std::size_t>(i)];
    Eigen::Index reward_col = 0;
    for (std::size_t c = 0; c < roles.size(); ++c) {
      switch (roles[c]) {
        case ColumnRole::kNumeric: {
          double v = 0;
          if (!parse_double(rec[c], v)) {
            throw IngestionError("column " + std::to_string(c + 1) + ": cannot parse '" + rec[c] +
                                     "' as a number",
                                 ln);
          }
          table.features(i, offset[c]) = v;
          break;
        }
        case ColumnRole::kCategorical: {
          const auto& voc = vocab[c];
          const auto pos = std::lower_bound(voc.begin(), voc.end(), rec[c]) - voc.begin();
          table.features(i, offset[c] + pos) = 1.0;
          break;
        }
        case ColumnRole::kLabel:
          if (schema.scheme == RewardScheme::kMushroom) {
            const bool poison = rec[c] == schema.poisonous_label;
            table.poisonous[static_cast<std::size_t>(i)] = poison ? 1 : 0;
            table.mean_rewards(i, 0) = poison ? -15.0 : 5.0;
            table.mean_rewards(i, 1) = 0.0;
          } else {
            table.mean_rewards(i, label_index.at(rec[c])) = 1.0;
          }
          break;
        case ColumnRole::kArmReward: {
          double v = 0;
          if (!parse_double(rec[c], v)) {
            throw IngestionError("column " + std::to_string(c + 1) + ": cannot parse reward '" +
                                     rec[c] + "'",
                                 ln);
          }
          table.mean_rewards(i, reward_col++) = v;
          break;
        }
        case ColumnRole::kIgnore:
          break;
      }
    }
  }
  return table;
}

DatasetTable load_dataset(const std::string& path, const DatasetSchema& schema) {
  std::ifstream in(path);
  if (!in) throw IngestionError("cannot open dataset file '" + path + "'", 0);
  return parse_dataset(in, schema);
}

// ------------------------------------------------------------ environment

DatasetEnv::DatasetEnv(std::shared_ptr<const DatasetTable> table, std::uint64_t seed,
                       std::size_t horizon, std::string name)
    : Environment(horizon == 0 ? table->rows() : horizon),
      table_(std::move(table)),
      name_(std::move(name)),
      shuffle_rng_(make_stream(seed, Stream::kDatasetShuffle)) {
  order_.resize(table_->rows());
  reshuffle();
  passes_ = 0;
}

void DatasetEnv::reshuffle() {
  std::iota(order_.begin(), order_.end(), std::size_t{0});
  std::shuffle(order_.begin(), order_.end(), shuffle_rng_);
  cursor_ = 0;
}

ArmSet DatasetEnv::draw_arms(Rng& /*rng*/) {
  if (cursor_ >= order_.size()) {
    ++passes_;
    std::clog << "[fgbench] dataset '" << name_ << "' exhausted after " << order_.size()
              << " rows; reshuffling (pass " << passes_ + 1 << ")\n";
    reshuffle();
  }
  const std::size_t row = order_[cursor_++];
  ArmSet set;
  set.row = static_cast<std::int64_t>(row);
  set.context = table_->features.row(static_cast<Eigen::Index>(row)).transpose();
  set.arms = block_arm_matrix(set.context, table_->num_arms());
  return set;
}

double DatasetEnv::mean_reward(const ArmSet& armset, std::size_t chosen) const {
  check_arm(armset, chosen);
  return table_->mean_rewards(armset.row, static_cast<Eigen::Index>(chosen));
}

double DatasetEnv::optimal_mean(const ArmSet& armset) const {
  return table_->mean_rewards.row(armset.row).maxCoeff();
}

double DatasetEnv::draw_reward(const ArmSet& armset, std::size_t chosen, Rng& rng) {
  if (table_->scheme == RewardScheme::kMushroom && chosen == 0 &&
      table_->poisonous[static_cast<std::size_t>(armset.row)]) {
    return uniform01(rng) < 0.5 ? 5.0 : -35.0;
  }
  return mean_reward(armset, chosen);
}

DatasetEnv load_dataset_env(const std::string& path, const DatasetSchema& schema,
                            std::uint64_t seed, std::size_t horizon) {
  auto table = std::make_shared<const DatasetTable>(load_dataset(path, schema));
  return DatasetEnv(std::move(table), seed, horizon);
}

}  // namespace fgbench
