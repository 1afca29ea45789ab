#include "cleanknn/interaction_matrix.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <unordered_set>

#include "cleanknn/detail/binary_io.hpp"
#include "cleanknn/errors.hpp"
#include "cleanknn/rng.hpp"

namespace cleanknn {

namespace {

constexpr char kMatrixMagic[4] = {'C', 'K', 'N', 'N'};
constexpr std::uint32_t kMatrixVersion = 1;

std::vector<std::string_view> split_fields(std::string_view line, std::string_view sep) {
  std::vector<std::string_view> fields;
  std::size_t pos = 0;
  while (true) {
    const std::size_t next = line.find(sep, pos);
    if (next == std::string_view::npos) {
      fields.push_back(line.substr(pos));
      break;
    }
    fields.push_back(line.substr(pos, next - pos));
    pos = next + sep.size();
  }
  return fields;
}

double parse_rating(std::string_view s, std::size_t line_no) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size() || !std::isfinite(v))
    throw MalformedLine(line_no, "bad rating '" + std::string(s) + "'");
  return v;
}

std::int64_t parse_timestamp(std::string_view s, std::size_t line_no) {
  std::int64_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw MalformedLine(line_no, "bad timestamp '" + std::string(s) + "'");
  return v;
}

std::ifstream open_text(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return in;
}

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

}  // namespace

std::vector<RawInteraction> parse_movielens(const std::filesystem::path& path) {
  std::ifstream in = open_text(path);
  std::vector<RawInteraction> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    const auto fields = split_fields(line, "::");
    if (fields.size() != 4)
      throw MalformedLine(line_no, "expected 4 '::'-separated fields, got " +
                                       std::to_string(fields.size()));
    if (fields[0].empty() || fields[1].empty())
      throw MalformedLine(line_no, "empty user or item id");
    RawInteraction r;
    r.user_id = std::string(fields[0]);
    r.item_id = std::string(fields[1]);
    r.rating = parse_rating(fields[2], line_no);
    r.timestamp = parse_timestamp(fields[3], line_no);
    out.push_back(std::move(r));
  }
  if (in.bad()) throw IoError("read error on " + path.string());
  return out;
}

std::vector<RawInteraction> parse_csv_triplets(const std::filesystem::path& path) {
  std::ifstream in = open_text(path);
  std::vector<RawInteraction> out;
  std::string line;
  std::size_t line_no = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    const auto fields = split_fields(line, ",");
    if (first) {
      first = false;
      if (!fields.empty() && fields[0] == "user") continue;  // header row
    }
    if (fields.size() < 2 || fields.size() > 4)
      throw MalformedLine(line_no, "expected 2-4 comma-separated fields, got " +
                                       std::to_string(fields.size()));
    if (fields[0].empty() || fields[1].empty())
      throw MalformedLine(line_no, "empty user or item id");
    RawInteraction r;
    r.user_id = std::string(fields[0]);
    r.item_id = std::string(fields[1]);
    if (fields.size() >= 3) r.rating = parse_rating(fields[2], line_no);
    if (fields.size() == 4) r.timestamp = parse_timestamp(fields[3], line_no);
    out.push_back(std::move(r));
  }
  if (in.bad()) throw IoError("read error on " + path.string());
  return out;
}

InteractionMatrix::InteractionMatrix(std::uint32_t n_users, std::uint32_t n_items,
                                     std::vector<std::uint64_t> row_ptr,
                                     std::vector<std::uint32_t> col_idx,
                                     std::vector<std::string> user_ids,
                                     std::vector<std::string> item_ids)
    : n_users_(n_users),
      n_items_(n_items),
      row_ptr_(std::move(row_ptr)),
      col_idx_(std::move(col_idx)),
      user_ids_(std::move(user_ids)),
      item_ids_(std::move(item_ids)) {
  build_index_maps();
}

InteractionMatrix::InteractionMatrix(const InteractionMatrix& other)
    : n_users_(other.n_users_),
      n_items_(other.n_items_),
      row_ptr_(other.row_ptr_),
      col_idx_(other.col_idx_),
      user_ids_(other.user_ids_),
      item_ids_(other.item_ids_),
      csc_(std::make_unique<Csc>()) {
  build_index_maps();
}

InteractionMatrix& InteractionMatrix::operator=(const InteractionMatrix& other) {
  if (this != &other) *this = InteractionMatrix(other);
  return *this;
}

void InteractionMatrix::build_index_maps() {
  user_lookup_.clear();
  item_lookup_.clear();
  user_lookup_.reserve(user_ids_.size());
  item_lookup_.reserve(item_ids_.size());
  for (std::uint32_t u = 0; u < user_ids_.size(); ++u) user_lookup_.emplace(user_ids_[u], u);
  for (std::uint32_t i = 0; i < item_ids_.size(); ++i) item_lookup_.emplace(item_ids_[i], i);
}

InteractionMatrix InteractionMatrix::binarize(const std::vector<RawInteraction>& interactions) {
  if (interactions.empty()) throw EmptyInput();

  std::vector<std::string> user_ids, item_ids;
  std::unordered_map<std::string, std::uint32_t> umap, imap;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> entries;
  entries.reserve(interactions.size());

  auto intern = [](const std::string& id, std::unordered_map<std::string, std::uint32_t>& map,
                   std::vector<std::string>& ids) {
    auto [it, inserted] = map.try_emplace(id, static_cast<std::uint32_t>(ids.size()));
    if (inserted) ids.push_back(id);
    return it->second;
  };
  for (const auto& r : interactions)
    entries.emplace_back(intern(r.user_id, umap, user_ids),
                         intern(r.item_id, imap, item_ids));

  return from_entries(static_cast<std::uint32_t>(user_ids.size()),
                      static_cast<std::uint32_t>(item_ids.size()), std::move(entries),
                      std::move(user_ids), std::move(item_ids));
}

InteractionMatrix InteractionMatrix::from_entries(
    std::uint32_t n_users, std::uint32_t n_items,
    std::vector<std::pair<std::uint32_t, std::uint32_t>> entries,
    std::vector<std::string> user_ids, std::vector<std::string> item_ids) {
  for (const auto& [u, i] : entries) {
    if (u >= n_users) throw IndexOutOfRange(u, n_users);
    if (i >= n_items) throw IndexOutOfRange(i, n_items);
  }
  std::sort(entries.begin(), entries.end());
  entries.erase(std::unique(entries.begin(), entries.end()), entries.end());

  std::vector<std::uint64_t> row_ptr(n_users + 1, 0);
  for (const auto& [u, i] : entries) ++row_ptr[u + 1];
  std::partial_sum(row_ptr.begin(), row_ptr.end(), row_ptr.begin());
  std::vector<std::uint32_t> col_idx(entries.size());
  for (std::size_t k = 0; k < entries.size(); ++k) col_idx[k] = entries[k].second;

  if (user_ids.empty()) {
    user_ids.reserve(n_users);
    for (std::uint32_t u = 0; u < n_users; ++u) user_ids.push_back("u" + std::to_string(u));
  }
  if (item_ids.empty()) {
    item_ids.reserve(n_items);
    for (std::uint32_t i = 0; i < n_items; ++i) item_ids.push_back("i" + std::to_string(i));
  }
  if (user_ids.size() != n_users || item_ids.size() != n_items)
    throw DimensionMismatch("id table size does not match matrix dimensions");

  return InteractionMatrix(n_users, n_items, std::move(row_ptr), std::move(col_idx),
                           std::move(user_ids), std::move(item_ids));
}

const InteractionMatrix::Csc& InteractionMatrix::csc() const {
  std::call_once(csc_->once, [this] {
    auto& c = *csc_;
    c.col_ptr.assign(n_items_ + 1, 0);
    for (std::uint32_t j : col_idx_) ++c.col_ptr[j + 1];
    std::partial_sum(c.col_ptr.begin(), c.col_ptr.end(), c.col_ptr.begin());
    c.row_idx.resize(col_idx_.size());
    std::vector<std::uint64_t> cursor(c.col_ptr.begin(), c.col_ptr.end() - 1);
    for (std::uint32_t u = 0; u < n_users_; ++u)
      for (std::uint64_t k = row_ptr_[u]; k < row_ptr_[u + 1]; ++k)
        c.row_idx[cursor[col_idx_[k]]++] = u;
  });
  return *csc_;
}

std::span<const std::uint32_t> InteractionMatrix::col(std::uint32_t j) const {
  const Csc& c = csc();
  return {c.row_idx.data() + c.col_ptr[j], c.row_idx.data() + c.col_ptr[j + 1]};
}

const std::vector<std::uint64_t>& InteractionMatrix::col_ptr() const { return csc().col_ptr; }

std::uint64_t InteractionMatrix::column_nnz(std::uint32_t j) const {
  const Csc& c = csc();
  return c.col_ptr[j + 1] - c.col_ptr[j];
}

bool InteractionMatrix::has(std::uint32_t u, std::uint32_t i) const {
  const auto r = row(u);
  return std::binary_search(r.begin(), r.end(), i);
}

std::optional<std::uint32_t> InteractionMatrix::user_index(std::string_view id) const {
  auto it = user_lookup_.find(id);
  if (it == user_lookup_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::uint32_t> InteractionMatrix::item_index(std::string_view id) const {
  auto it = item_lookup_.find(id);
  if (it == item_lookup_.end()) return std::nullopt;
  return it->second;
}

InteractionMatrix InteractionMatrix::transposed() const {
  const Csc& c = csc();
  return InteractionMatrix(n_items_, n_users_, c.col_ptr, c.row_idx, item_ids_, user_ids_);
}

std::uint64_t InteractionMatrix::structural_hash() const {
  std::uint64_t h = 0xCBF29CE484222325ull;
  auto mix = [&h](std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      h ^= (v >> (8 * i)) & 0xFF;
      h *= 0x100000001B3ull;
    }
  };
  mix(n_users_);
  mix(n_items_);
  mix(nnz());
  for (std::uint64_t p : row_ptr_) mix(p);
  for (std::uint32_t j : col_idx_) mix(j);
  return h;
}

void InteractionMatrix::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(kMatrixMagic, 4);
  detail::put_u32(out, kMatrixVersion);
  detail::put_u64(out, n_users_);
  detail::put_u64(out, n_items_);
  detail::put_u64(out, nnz());
  for (std::uint64_t p : row_ptr_) detail::put_u64(out, p);
  for (std::uint32_t j : col_idx_) detail::put_u32(out, j);
  detail::put_u64(out, user_ids_.size());
  for (const auto& s : user_ids_) detail::put_string(out, s);
  detail::put_u64(out, item_ids_.size());
  for (const auto& s : item_ids_) detail::put_string(out, s);
  if (!out) throw IoError("write error on " + path.string());
}

InteractionMatrix InteractionMatrix::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  char magic[4];
  if (!in.read(magic, 4)) throw CorruptFile("truncated");
  if (std::memcmp(magic, kMatrixMagic, 4) != 0) throw CorruptFile("magic");
  if (detail::get_u32(in) != kMatrixVersion) throw CorruptFile("version");

  const std::uint64_t n_users = detail::get_u64(in);
  const std::uint64_t n_items = detail::get_u64(in);
  const std::uint64_t nnz = detail::get_u64(in);
  if (n_users > UINT32_MAX || n_items > UINT32_MAX) throw CorruptFile("dimensions");

  std::vector<std::uint64_t> row_ptr(n_users + 1);
  for (auto& p : row_ptr) p = detail::get_u64(in);
  if (row_ptr.front() != 0 || row_ptr.back() != nnz ||
      !std::is_sorted(row_ptr.begin(), row_ptr.end()))
    throw CorruptFile("row pointers");

  std::vector<std::uint32_t> col_idx(nnz);
  for (auto& j : col_idx) j = detail::get_u32(in);
  for (std::uint64_t u = 0; u < n_users; ++u) {
    for (std::uint64_t k = row_ptr[u]; k < row_ptr[u + 1]; ++k) {
      if (col_idx[k] >= n_items) throw CorruptFile("column indices");
      if (k > row_ptr[u] && col_idx[k] <= col_idx[k - 1])
        throw CorruptFile("column indices");
    }
  }

  if (detail::get_u64(in) != n_users) throw CorruptFile("user id table");
  std::vector<std::string> user_ids(n_users);
  for (auto& s : user_ids) s = detail::get_string(in);
  if (detail::get_u64(in) != n_items) throw CorruptFile("item id table");
  std::vector<std::string> item_ids(n_items);
  for (auto& s : item_ids) s = detail::get_string(in);

  return InteractionMatrix(static_cast<std::uint32_t>(n_users),
                           static_cast<std::uint32_t>(n_items), std::move(row_ptr),
                           std::move(col_idx), std::move(user_ids), std::move(item_ids));
}

void InteractionMatrix::write_csv(std::ostream& out) const {
  out << "user,item\n";
  for (std::uint32_t u = 0; u < n_users_; ++u)
    for (std::uint32_t i : row(u)) out << user_ids_[u] << ',' << item_ids_[i] << '\n';
}

std::vector<std::uint64_t> FoldSpec::fold_sizes() const {
  std::vector<std::uint64_t> sizes(n_folds, 0);
  for (std::uint32_t a : assignments)
    if (a != kExempt) ++sizes[a];
  return sizes;
}

FoldSpec split_folds(const InteractionMatrix& matrix, std::uint32_t n_folds,
                     std::uint64_t seed) {
  if (n_folds < 2) throw TooFewFolds(n_folds);
  FoldSpec spec;
  spec.n_folds = n_folds;
  spec.seed = seed;
  spec.assignments.assign(matrix.nnz(), FoldSpec::kExempt);

  const auto& row_ptr = matrix.row_ptr();
  for (std::uint32_t u = 0; u < matrix.n_users(); ++u) {
    const std::uint64_t begin = row_ptr[u];
    const std::uint64_t count = row_ptr[u + 1] - begin;
    if (count == 0) continue;
    if (count < n_folds) {
      ++spec.exempted_users;
      continue;
    }
    std::vector<std::uint32_t> order(count);
    std::iota(order.begin(), order.end(), 0u);
    Prng prng(derive_seed(seed, "fold-shuffle", u));
    prng.shuffle(order);
    for (std::uint64_t t = 0; t < count; ++t)
      spec.assignments[begin + order[t]] = static_cast<std::uint32_t>(t % n_folds);
  }
  return spec;
}

std::pair<InteractionMatrix, InteractionMatrix> materialize_split(
    const InteractionMatrix& matrix, const FoldSpec& folds, std::uint32_t test_fold) {
  if (test_fold >= folds.n_folds) throw FoldOutOfRange(test_fold, folds.n_folds);
  if (folds.assignments.size() != matrix.nnz())
    throw DimensionMismatch("fold assignments do not match matrix nnz");

  std::vector<std::pair<std::uint32_t, std::uint32_t>> train_entries, test_entries;
  const auto& row_ptr = matrix.row_ptr();
  const auto& col_idx = matrix.col_idx();
  for (std::uint32_t u = 0; u < matrix.n_users(); ++u) {
    for (std::uint64_t k = row_ptr[u]; k < row_ptr[u + 1]; ++k) {
      if (folds.assignments[k] == test_fold)
        test_entries.emplace_back(u, col_idx[k]);
      else
        train_entries.emplace_back(u, col_idx[k]);
    }
  }
  auto train = InteractionMatrix::from_entries(matrix.n_users(), matrix.n_items(),
                                               std::move(train_entries),
                                               matrix.user_ids(), matrix.item_ids());
  auto test = InteractionMatrix::from_entries(matrix.n_users(), matrix.n_items(),
                                              std::move(test_entries),
                                              matrix.user_ids(), matrix.item_ids());
  return {std::move(train), std::move(test)};
}

}  // namespace cleanknn
