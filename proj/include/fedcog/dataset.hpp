#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "fedcog/graph.hpp"

namespace fedcog {

/// Loads a citation-network dataset from the classic two-file layout:
///   content: node_id <TAB> f1 <TAB> ... <TAB> fF <TAB> label
///   cites:   cited_id <TAB> citing_id          (treated as undirected)
/// Node ids are arbitrary strings; labels map to class ids in first-appearance
/// order. Duplicate edges collapse, self-citations are dropped, and an edge
/// referencing an unknown node id is an error.
inline GlobalGraph load_citation_dataset(const std::string& content_path,
                                         const std::string& cites_path) {
  std::ifstream content(content_path);
  if (!content) throw std::runtime_error("cannot open content file: " + content_path);

  std::unordered_map<std::string, int> node_index;
  std::unordered_map<std::string, int> label_index;
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  int feature_dim = -1;

  std::string line;
  long long line_no = 0;
  while (std::getline(content, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, '\t')) fields.push_back(field);
    if (fields.size() < 3)
      throw std::runtime_error(content_path + ":" + std::to_string(line_no) +
                               ": malformed content line (need id, features, label)");
    const int f = static_cast<int>(fields.size()) - 2;
    if (feature_dim < 0) feature_dim = f;
    if (f != feature_dim)
      throw std::runtime_error(content_path + ":" + std::to_string(line_no) +
                               ": inconsistent feature count");
    if (!node_index.emplace(fields[0], static_cast<int>(rows.size())).second)
      throw std::runtime_error(content_path + ":" + std::to_string(line_no) +
                               ": duplicate node id " + fields[0]);
    std::vector<double> feat(feature_dim);
    for (int j = 0; j < feature_dim; ++j) {
      try {
        std::size_t pos = 0;
        feat[j] = std::stod(fields[j + 1], &pos);
        if (pos != fields[j + 1].size()) throw std::invalid_argument("trailing characters");
      } catch (const std::exception&) {
        throw std::runtime_error(content_path + ":" + std::to_string(line_no) +
                                 ": bad feature value '" + fields[j + 1] + "'");
      }
    }
    rows.push_back(std::move(feat));
    const std::string& label = fields.back();
    auto [it, inserted] = label_index.emplace(label, static_cast<int>(label_index.size()));
    labels.push_back(it->second);
  }
  if (rows.empty()) throw std::runtime_error(content_path + ": no nodes");

  std::ifstream cites(cites_path);
  if (!cites) throw std::runtime_error("cannot open cites file: " + cites_path);
  std::vector<std::pair<int, int>> edges;
  line_no = 0;
  while (std::getline(cites, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, '\t')) fields.push_back(field);
    if (fields.size() != 2)
      throw std::runtime_error(cites_path + ":" + std::to_string(line_no) +
                               ": malformed cites line");
    auto a = node_index.find(fields[0]);
    auto b = node_index.find(fields[1]);
    if (a == node_index.end() || b == node_index.end())
      throw std::runtime_error(cites_path + ":" + std::to_string(line_no) +
                               ": edge references unknown node id");
    if (a->second == b->second) continue;  // self-citation
    edges.emplace_back(a->second, b->second);
  }

  const int n = static_cast<int>(rows.size());
  Matrix feats(n, feature_dim);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < feature_dim; ++j) feats(i, j) = rows[i][j];
  return GlobalGraph::build(n, std::move(edges), std::move(feats), std::move(labels),
                            static_cast<int>(label_index.size()));
}

}  // namespace fedcog
