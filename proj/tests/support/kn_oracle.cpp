#include "kn_oracle.hpp"

#include <cmath>
#include <set>

namespace oracle {

KneserNey::KneserNey(const std::vector<std::vector<std::string>>& sentences, int order) : order_(order) {
  std::set<std::string> vocab{"<unk>", "</s>"};
  for (const auto& s : sentences) {
    if (s.empty()) continue;
    Gram padded{"<s>"};
    for (const auto& w : s) {
      padded.push_back(w);
      vocab.insert(w);
    }
    padded.push_back("</s>");
    text_.push_back(padded);
  }
  predictable_.assign(vocab.begin(), vocab.end());

  // every n-gram occurrence ending at a predicted position
  std::vector<std::set<Gram>> seen(order + 1);
  std::map<Gram, double> raw;
  for (const auto& s : text_) {
    for (std::size_t end = 1; end < s.size(); ++end) {
      for (int n = 1; n <= order && static_cast<int>(end) + 1 >= n; ++n) {
        Gram g(s.begin() + (end + 1 - n), s.begin() + end + 1);
        raw[g] += 1.0;
        seen[n].insert(g);
      }
    }
  }
  level_.resize(order + 1);
  for (int n = 1; n <= order; ++n) {
    for (const auto& g : seen[n]) {
      if (n == order || g.front() == "<s>") {
        level_[n][g] = raw[g];
      } else {
        // distinct left neighbours, <s> included
        std::set<std::string> left;
        for (const auto& ext : seen[n + 1])
          if (std::equal(g.begin(), g.end(), ext.begin() + 1)) left.insert(ext.front());
        level_[n][g] = static_cast<double>(left.size());
      }
    }
  }
  d_.resize(order + 1);
  for (int n = 1; n <= order; ++n) d_[n] = discounts(n);
}

std::vector<double> KneserNey::discounts(int n) const {
  double c[5] = {0, 0, 0, 0, 0};
  for (const auto& [g, v] : level_[n])
    if (v >= 1 && v <= 4) c[static_cast<int>(v)] += 1;
  const std::vector<double> fallback{0.75, 0.75, 0.75};
  if (c[1] == 0 || c[2] == 0 || c[3] == 0) return fallback;
  const double y = c[1] / (c[1] + 2 * c[2]);
  std::vector<double> d{1 - 2 * y * c[2] / c[1], 2 - 3 * y * c[3] / c[2], 3 - 4 * y * c[4] / c[3]};
  for (int k = 0; k < 3; ++k)
    if (!(d[k] > 0 && d[k] <= k + 1)) return fallback;
  return d;
}

double KneserNey::count(const Gram& g) const {
  const auto& m = level_[g.size()];
  auto it = m.find(g);
  return it == m.end() ? 0.0 : it->second;
}

double KneserNey::p(const Gram& history, const std::string& word) const {
  const int n = static_cast<int>(history.size()) + 1;
  double lower;
  if (n == 1) {
    lower = 1.0 / static_cast<double>(predictable_.size());
  } else {
    lower = p(Gram(history.begin() + 1, history.end()), word);
  }
  double total = 0, n1 = 0, n2 = 0, n3 = 0;
  for (const auto& v : predictable_) {
    Gram g = history;
    g.push_back(v);
    const double c = count(g);
    total += c;
    if (c == 1) n1 += 1;
    else if (c == 2) n2 += 1;
    else if (c >= 3) n3 += 1;
  }
  if (total == 0) return lower;
  Gram g = history;
  g.push_back(word);
  const double c = count(g);
  const auto& d = d_[n];
  const double disc = c == 0 ? 0 : c == 1 ? d[0] : c == 2 ? d[1] : d[2];
  const double gamma = (d[0] * n1 + d[1] * n2 + d[2] * n3) / total;
  return std::max(c - disc, 0.0) / total + gamma * lower;
}

double KneserNey::prob(const std::vector<std::string>& history, const std::string& word) const {
  auto known = [&](const std::string& w) {
    if (w == "<s>") return w;
    for (const auto& v : predictable_)
      if (v == w) return w;
    return std::string("<unk>");
  };
  Gram h;
  const std::size_t keep = std::min<std::size_t>(history.size(), order_ - 1);
  for (std::size_t i = history.size() - keep; i < history.size(); ++i) h.push_back(known(history[i]));
  return p(h, known(word));
}

double KneserNey::sentence_logprob_avg(const std::vector<std::string>& tokens) const {
  Gram s{"<s>"};
  s.insert(s.end(), tokens.begin(), tokens.end());
  s.push_back("</s>");
  double sum = 0;
  for (std::size_t i = 1; i < s.size(); ++i)
    sum += std::log(prob(Gram(s.begin(), s.begin() + i), s[i]));
  return sum / static_cast<double>(s.size() - 1);
}

}  // namespace oracle
