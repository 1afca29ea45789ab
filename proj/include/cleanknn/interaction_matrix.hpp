#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace cleanknn {

struct RawInteraction {
  std::string user_id;
  std::string item_id;
  double rating = 1.0;
  std::int64_t timestamp = 0;
};

// MovieLens .dat lines: UserID::MovieID::Rating::Timestamp.
std::vector<RawInteraction> parse_movielens(const std::filesystem::path& path);

// CSV lines: user,item[,rating[,timestamp]] with an optional header row.
// A missing rating is read as 1.0.
std::vector<RawInteraction> parse_csv_triplets(const std::filesystem::path& path);

// Sparse binary user x item incidence matrix in CSR form with a lazily
// built CSC twin. Immutable after construction; all stored entries are 1.
class InteractionMatrix {
public:
  // Collapses duplicate (user, item) pairs to a single entry. Row/column
  // indices are assigned in first-appearance order.
  static InteractionMatrix binarize(const std::vector<RawInteraction>& interactions);

  // Direct construction from index pairs; duplicates collapse, entries are
  // canonically sorted. Missing ID tables get synthetic "u<i>" / "i<j>" names.
  static InteractionMatrix from_entries(std::uint32_t n_users, std::uint32_t n_items,
                                        std::vector<std::pair<std::uint32_t, std::uint32_t>> entries,
                                        std::vector<std::string> user_ids = {},
                                        std::vector<std::string> item_ids = {});

  std::uint32_t n_users() const noexcept { return n_users_; }
  std::uint32_t n_items() const noexcept { return n_items_; }
  std::uint64_t nnz() const noexcept { return col_idx_.size(); }
  double density() const noexcept {
    return n_users_ == 0 || n_items_ == 0
               ? 0.0
               : static_cast<double>(nnz()) / (static_cast<double>(n_users_) * n_items_);
  }

  // Item indices of user u, ascending.
  std::span<const std::uint32_t> row(std::uint32_t u) const {
    return {col_idx_.data() + row_ptr_[u], col_idx_.data() + row_ptr_[u + 1]};
  }
  const std::vector<std::uint64_t>& row_ptr() const noexcept { return row_ptr_; }
  const std::vector<std::uint32_t>& col_idx() const noexcept { return col_idx_; }

  // User indices of item j, ascending. First call builds the CSC twin.
  std::span<const std::uint32_t> col(std::uint32_t j) const;
  const std::vector<std::uint64_t>& col_ptr() const;
  std::uint64_t column_nnz(std::uint32_t j) const;

  bool has(std::uint32_t u, std::uint32_t i) const;

  const std::vector<std::string>& user_ids() const noexcept { return user_ids_; }
  const std::vector<std::string>& item_ids() const noexcept { return item_ids_; }
  std::optional<std::uint32_t> user_index(std::string_view id) const;
  std::optional<std::uint32_t> item_index(std::string_view id) const;

  // Swaps the user/item roles (rows become columns and vice versa).
  InteractionMatrix transposed() const;

  // FNV-1a over dimensions and sparse structure; recorded in model provenance.
  std::uint64_t structural_hash() const;

  void save(const std::filesystem::path& path) const;
  static InteractionMatrix load(const std::filesystem::path& path);
  void write_csv(std::ostream& out) const;

  InteractionMatrix(const InteractionMatrix& other);
  InteractionMatrix& operator=(const InteractionMatrix& other);
  InteractionMatrix(InteractionMatrix&&) noexcept = default;
  InteractionMatrix& operator=(InteractionMatrix&&) noexcept = default;

private:
  InteractionMatrix() = default;
  InteractionMatrix(std::uint32_t n_users, std::uint32_t n_items,
                    std::vector<std::uint64_t> row_ptr, std::vector<std::uint32_t> col_idx,
                    std::vector<std::string> user_ids, std::vector<std::string> item_ids);

  void build_index_maps();

  std::uint32_t n_users_ = 0;
  std::uint32_t n_items_ = 0;
  std::vector<std::uint64_t> row_ptr_;
  std::vector<std::uint32_t> col_idx_;
  std::vector<std::string> user_ids_;
  std::vector<std::string> item_ids_;
  std::unordered_map<std::string_view, std::uint32_t> user_lookup_;
  std::unordered_map<std::string_view, std::uint32_t> item_lookup_;

  // CSC twin, built on first column access (kept behind a stable heap slot so
  // the matrix stays movable).
  struct Csc {
    std::once_flag once;
    std::vector<std::uint64_t> col_ptr;
    std::vector<std::uint32_t> row_idx;
  };
  mutable std::unique_ptr<Csc> csc_ = std::make_unique<Csc>();
  const Csc& csc() const;
};

// Per-interaction fold labels aligned with the matrix's CSR entry order.
// Users with fewer interactions than n_folds are exempted: their entries
// carry kExempt and stay in training for every fold.
struct FoldSpec {
  static constexpr std::uint32_t kExempt = UINT32_MAX;

  std::uint32_t n_folds = 0;
  std::uint64_t seed = 0;
  std::vector<std::uint32_t> assignments;
  std::uint32_t exempted_users = 0;

  std::vector<std::uint64_t> fold_sizes() const;
};

// Per-user stratified split: each user's interactions are dealt round-robin
// over folds after a seeded per-user shuffle. Deterministic for a fixed seed.
FoldSpec split_folds(const InteractionMatrix& matrix, std::uint32_t n_folds,
                     std::uint64_t seed);

// Train gets every entry not assigned to test_fold (exempt entries included);
// both halves share the parent's dimensions and ID maps.
std::pair<InteractionMatrix, InteractionMatrix> materialize_split(
    const InteractionMatrix& matrix, const FoldSpec& folds, std::uint32_t test_fold);

}  // namespace cleanknn
