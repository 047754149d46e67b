#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "aewb/tensor.hpp"

namespace aewb {

enum class ColKind : uint8_t { Numeric, Nominal };

struct Column {
  std::string name;
  ColKind kind = ColKind::Numeric;
  std::vector<std::string> categories;  // nominal only; declaration order
  std::string source;                   // original column for dummy-expanded ones
};

/// Instance matrix plus column metadata. Nominal cells hold the category
/// index; missing numeric cells hold NaN until imputation. split holds one
/// flag per row (0 train, 1 test); empty means everything is train.
struct Dataset {
  std::vector<Column> columns;
  Tensor X;  // [B, n]
  std::vector<int> split;
  bool scaled = false;
  std::vector<double> scale_min, scale_max;  // per column, train-split stats
  std::string relation;                      // ARFF relation name, if any

  int rows() const { return X.rank() == 2 ? X.dim(0) : 0; }
  int cols() const { return static_cast<int>(columns.size()); }
  bool is_train(int row) const { return split.empty() || split[static_cast<size_t>(row)] == 0; }

  Tensor train_matrix() const;
  Tensor test_matrix() const;
  std::vector<int> train_rows() const;
  std::vector<int> test_rows() const;
};

Dataset parse_csv(const std::string& bytes, bool has_header, char delimiter);
std::string write_csv(const Dataset& ds, char delimiter);

Dataset parse_arff(const std::string& bytes);
std::string write_arff(const Dataset& ds);

// Replaces NaN numeric cells by the training-split column mean.
void impute_missing(Dataset& ds);

// Expands every nominal column with c categories into c indicator columns.
Dataset dummy_encode(const Dataset& ds);

// Min-max scaling with stats from the training split; constant columns map
// to 0 and test values are clamped to [0,1].
void minmax_scale(Dataset& ds);
double unscale_cell(const Dataset& ds, int col, double v);

// Seeded shuffle, then the first round(test_fraction*B) shuffled rows become
// the test split.
void split_dataset(Dataset& ds, double test_fraction, uint64_t seed);

// Removes a column and returns its values (nominal: category indices).
std::vector<double> extract_target(Dataset& ds, const std::string& column_name);

int find_column(const Dataset& ds, const std::string& name);

}  // namespace aewb
