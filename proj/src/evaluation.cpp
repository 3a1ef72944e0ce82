#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

#include "csv_util.hpp"
#include "spdpool/classify.hpp"
#include "spdpool/error.hpp"
#include "spdpool/rng.hpp"

namespace spdpool {

double average_precision(std::span<const double> scores, const std::vector<bool>& positives) {
  if (scores.size() != positives.size())
    throw InvalidArgument("average_precision: " + std::to_string(scores.size()) + " scores but " +
                          std::to_string(positives.size()) + " labels");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  double sum = 0.0;
  std::size_t hits = 0;
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    if (!positives[order[rank]]) continue;
    ++hits;
    sum += static_cast<double>(hits) / static_cast<double>(rank + 1);
  }
  if (hits == 0) throw InvalidArgument("average_precision: no positive items");
  return sum / static_cast<double>(hits);
}

std::vector<Fold> kfold(std::span<const int> labels, int k, std::uint64_t seed) {
  const std::size_t n = labels.size();
  if (k < 2) throw InvalidArgument("kfold: k must be >= 2");
  if (static_cast<std::size_t>(k) > n)
    throw InvalidArgument("kfold: k = " + std::to_string(k) + " exceeds the " + std::to_string(n) + " samples");
  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < n; ++i) by_class[labels[i]].push_back(i);
  Rng rng(seed);
  std::vector<int> fold_of(n);
  std::size_t deal = 0;
  for (auto& [label, members] : by_class) {
    rng.shuffle(members);
    for (std::size_t i : members) fold_of[i] = static_cast<int>(deal++ % static_cast<std::size_t>(k));
  }
  std::vector<Fold> folds(k);
  for (std::size_t i = 0; i < n; ++i)
    for (int f = 0; f < k; ++f) (fold_of[i] == f ? folds[f].test : folds[f].train).push_back(i);
  return folds;
}

std::vector<Fold> kfold(const Dataset& data, int k, std::uint64_t seed) {
  const auto labels = data.labels();
  return kfold(std::span<const int>(labels), k, seed);
}

EvalReport evaluate(const Eigen::MatrixXd& scores, std::span<const int> predicted, std::span<const int> truth,
                    int fold_id) {
  const auto n = truth.size();
  if (predicted.size() != n || static_cast<std::size_t>(scores.rows()) != n)
    throw InvalidArgument("evaluate: " + std::to_string(n) + " ground-truth labels, " +
                          std::to_string(predicted.size()) + " predictions, " + std::to_string(scores.rows()) +
                          " score rows");
  if (n == 0) throw InvalidArgument("evaluate: nothing to evaluate");
  const int m = static_cast<int>(scores.cols());
  EvalReport r;
  r.fold_id = fold_id;
  r.confusion = Eigen::MatrixXi::Zero(m, m);
  for (std::size_t i = 0; i < n; ++i) {
    if (truth[i] < 1 || truth[i] > m || predicted[i] < 1 || predicted[i] > m)
      throw InvalidArgument("evaluate: label outside [1, " + std::to_string(m) + "] at row " + std::to_string(i + 1));
    ++r.confusion(truth[i] - 1, predicted[i] - 1);
  }
  r.accuracy = static_cast<double>(r.confusion.trace()) / static_cast<double>(n);
  double sum = 0.0;
  int counted = 0;
  std::vector<double> column(n);
  for (int c = 0; c < m; ++c) {
    std::vector<bool> pos(n);
    bool any = false;
    for (std::size_t i = 0; i < n; ++i) {
      pos[i] = truth[i] == c + 1;
      any = any || pos[i];
      column[i] = scores(static_cast<Eigen::Index>(i), c);
    }
    if (!any) {
      r.per_class_ap.push_back(std::numeric_limits<double>::quiet_NaN());
      continue;
    }
    r.per_class_ap.push_back(average_precision(column, pos));
    sum += r.per_class_ap.back();
    ++counted;
  }
  r.mean_ap = counted > 0 ? sum / counted : std::numeric_limits<double>::quiet_NaN();
  return r;
}

CrossValidation cross_validate(const Eigen::MatrixXd& gram, std::span<const int> labels, int k,
                               const SvmParams& params, std::uint64_t fold_seed, int num_classes) {
  if (gram.rows() != gram.cols() || gram.rows() != static_cast<Eigen::Index>(labels.size()))
    throw InvalidArgument("cross_validate: Gram and labels disagree in size");
  if (num_classes == 0) num_classes = *std::max_element(labels.begin(), labels.end());
  const auto folds = kfold(labels, k, fold_seed);
  CrossValidation out;
  const std::size_t n = labels.size();
  Eigen::MatrixXd all_scores(n, num_classes);
  std::vector<int> all_pred(n);
  for (std::size_t f = 0; f < folds.size(); ++f) {
    const auto& tr = folds[f].train;
    const auto& te = folds[f].test;
    Eigen::MatrixXd g_train(tr.size(), tr.size()), g_test(te.size(), tr.size());
    std::vector<int> y_train(tr.size()), y_test(te.size());
    for (std::size_t a = 0; a < tr.size(); ++a) {
      y_train[a] = labels[tr[a]];
      for (std::size_t b = 0; b < tr.size(); ++b) g_train(a, b) = gram(tr[a], tr[b]);
    }
    for (std::size_t a = 0; a < te.size(); ++a) {
      y_test[a] = labels[te[a]];
      for (std::size_t b = 0; b < tr.size(); ++b) g_test(a, b) = gram(te[a], tr[b]);
    }
    const auto model = svm_train(g_train, y_train, params, num_classes);
    const auto pred = svm_predict(model, g_test);
    out.folds.push_back(evaluate(pred.scores, pred.labels, y_test, static_cast<int>(f)));
    for (std::size_t a = 0; a < te.size(); ++a) {
      all_scores.row(te[a]) = pred.scores.row(a);
      all_pred[te[a]] = pred.labels[a];
    }
  }
  out.pooled = evaluate(all_scores, all_pred, labels);
  return out;
}

std::string format_eval_csv(const EvalReport& r) {
  using detail::append_double;
  std::string out = "fold," + std::to_string(r.fold_id) + "\naccuracy,";
  append_double(out, r.accuracy);
  out += "\nmean_ap,";
  append_double(out, r.mean_ap);
  out += "\nap";
  for (double ap : r.per_class_ap) {
    out += ',';
    append_double(out, ap);
  }
  out += '\n';
  for (Eigen::Index i = 0; i < r.confusion.rows(); ++i) {
    out += "confusion_" + std::to_string(i + 1);
    for (Eigen::Index j = 0; j < r.confusion.cols(); ++j) out += ',' + std::to_string(r.confusion(i, j));
    out += '\n';
  }
  return out;
}

std::string format_eval_text(const EvalReport& r) {
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(4);
  s << (r.fold_id < 0 ? std::string("all folds") : "fold " + std::to_string(r.fold_id)) << '\n';
  s << "  accuracy  " << r.accuracy << '\n';
  s << "  mean AP   " << r.mean_ap << '\n';
  for (std::size_t c = 0; c < r.per_class_ap.size(); ++c) s << "  AP[" << c + 1 << "]     " << r.per_class_ap[c] << '\n';
  s << "  confusion (rows = truth)\n";
  for (Eigen::Index i = 0; i < r.confusion.rows(); ++i) {
    s << "   ";
    for (Eigen::Index j = 0; j < r.confusion.cols(); ++j) s << ' ' << r.confusion(i, j);
    s << '\n';
  }
  return s.str();
}

std::string format_predictions_csv(const SvmPrediction& pred, std::span<const std::string> ids) {
  if (ids.size() != pred.labels.size()) throw InvalidArgument("predictions: id count does not match rows");
  std::string out = "id,label";
  for (Eigen::Index c = 0; c < pred.scores.cols(); ++c) out += ",score_" + std::to_string(c + 1);
  out += '\n';
  for (std::size_t i = 0; i < ids.size(); ++i) {
    out += ids[i] + ',' + std::to_string(pred.labels[i]);
    for (Eigen::Index c = 0; c < pred.scores.cols(); ++c) {
      out += ',';
      detail::append_double(out, pred.scores(static_cast<Eigen::Index>(i), c));
    }
    out += '\n';
  }
  return out;
}

SvmPrediction parse_predictions_csv(const std::string& text, std::vector<std::string>* ids) {
  std::vector<std::vector<std::string_view>> rows;
  std::vector<std::size_t> row_numbers;
  bool header_seen = false;
  std::size_t line_no = 0;
  for (auto line : detail::lines(text)) {
    ++line_no;
    line = detail::trim(line);
    if (line.empty() || line.front() == '#') continue;
    if (!header_seen) {
      if (line.substr(0, 8) != "id,label") throw FormatError("predictions: expected header 'id,label,...'", line_no, 1);
      header_seen = true;
      continue;
    }
    rows.push_back(detail::split(line, ','));
    row_numbers.push_back(line_no);
  }
  if (rows.empty()) throw FormatError("predictions: no rows");
  const std::size_t cols = rows.front().size();
  if (cols < 3) throw FormatError("predictions: need at least one score column", row_numbers.front(), cols);
  SvmPrediction out;
  out.scores.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols - 2));
  if (ids) ids->clear();
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != cols)
      throw FormatError("predictions: row has " + std::to_string(rows[r].size()) + " cells, expected " +
                        std::to_string(cols), row_numbers[r], std::min(rows[r].size(), cols) + 1);
    if (ids) ids->emplace_back(detail::trim(rows[r][0]));
    try {
      out.labels.push_back(detail::parse_int(rows[r][1], "label"));
    } catch (const FormatError&) {
      throw FormatError("predictions: non-integer label '" + std::string(rows[r][1]) + "'", row_numbers[r], 2);
    }
    for (std::size_t c = 2; c < cols; ++c)
      out.scores(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c - 2)) =
          detail::parse_cell(rows[r][c], row_numbers[r], c + 1);
  }
  return out;
}

}  // namespace spdpool
