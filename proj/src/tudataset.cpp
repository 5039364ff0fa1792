#include "ifmix/tudataset.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

namespace fs = std::filesystem;

namespace ifmix {

ParseError::ParseError(const fs::path& file, std::size_t line, const std::string& what)
    : std::runtime_error(file.string() + (line > 0 ? ":" + std::to_string(line) : std::string()) + ": " + what),
      file_(file), line_(line) {}

bool TUDatasetFiles::has_node_labels() const { return fs::exists(file("node_labels")); }

Index ParsedDataset::class_index(std::size_t graph) const {
  const auto it = std::lower_bound(class_values.begin(), class_values.end(), graph_labels[graph]);
  return static_cast<Index>(it - class_values.begin());
}

namespace {

struct Line {
  std::size_t number;
  std::vector<std::string> tokens;
};

std::vector<std::string> split_tokens(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',' || std::isspace(static_cast<unsigned char>(c))) {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

// Non-blank lines with their 1-based line numbers.
std::vector<Line> read_lines(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path, 0, "missing or unreadable file");
  std::vector<Line> out;
  std::string s;
  std::size_t n = 0;
  while (std::getline(in, s)) {
    ++n;
    auto tokens = split_tokens(s);
    if (!tokens.empty()) out.push_back({n, std::move(tokens)});
  }
  return out;
}

long to_long(const std::string& tok, const fs::path& file, std::size_t line) {
  long v = 0;
  const auto* end = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(tok.data(), end, v);
  if (ec != std::errc() || ptr != end) throw ParseError(file, line, "non-integer token '" + tok + "'");
  return v;
}

double to_double(const std::string& tok, const fs::path& file, std::size_t line) {
  char* end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (end != tok.c_str() + tok.size() || tok.empty()) throw ParseError(file, line, "non-numeric token '" + tok + "'");
  return v;
}

std::vector<long> single_column(const fs::path& path) {
  std::vector<long> out;
  for (const auto& l : read_lines(path)) {
    if (l.tokens.size() != 1) throw ParseError(path, l.number, "expected one value per line");
    out.push_back(to_long(l.tokens[0], path, l.number));
  }
  return out;
}

struct NodeLayout {
  std::vector<std::size_t> graph_of; ///< 0-based graph per node
  std::vector<std::size_t> first;    ///< first global node of each graph
  std::vector<std::size_t> count;
};

NodeLayout read_indicator(const fs::path& path) {
  NodeLayout layout;
  long expected = 1;
  for (const auto& l : read_lines(path)) {
    if (l.tokens.size() != 1) throw ParseError(path, l.number, "expected one graph id per line");
    const long g = to_long(l.tokens[0], path, l.number);
    if (g == expected) {
      layout.first.push_back(layout.graph_of.size());
      layout.count.push_back(0);
      ++expected;
    } else if (g != expected - 1) {
      throw ParseError(path, l.number,
                       "graph id " + std::to_string(g) + " out of order (expected " + std::to_string(expected - 1) +
                           " or " + std::to_string(expected) + ")");
    }
    layout.graph_of.push_back(static_cast<std::size_t>(g - 1));
    ++layout.count.back();
  }
  if (layout.graph_of.empty()) throw ParseError(path, 0, "no nodes");
  return layout;
}

struct EdgeLine {
  std::size_t line;
  std::size_t u;
  std::size_t v;
};

std::vector<EdgeLine> read_edges(const fs::path& path, const NodeLayout& layout) {
  std::vector<EdgeLine> out;
  const auto total = layout.graph_of.size();
  for (const auto& l : read_lines(path)) {
    if (l.tokens.size() != 2) throw ParseError(path, l.number, "expected two node ids");
    const long a = to_long(l.tokens[0], path, l.number);
    const long b = to_long(l.tokens[1], path, l.number);
    for (long id : {a, b}) {
      if (id < 1 || static_cast<std::size_t>(id) > total) {
        throw ParseError(path, l.number,
                         "node id " + std::to_string(id) + " outside the " + std::to_string(total) +
                             " nodes listed in the graph indicator");
      }
    }
    const auto u = static_cast<std::size_t>(a - 1);
    const auto v = static_cast<std::size_t>(b - 1);
    if (layout.graph_of[u] != layout.graph_of[v]) {
      throw ParseError(path, l.number,
                       "edge " + std::to_string(a) + "-" + std::to_string(b) + " crosses graphs " +
                           std::to_string(layout.graph_of[u] + 1) + " and " + std::to_string(layout.graph_of[v] + 1));
    }
    out.push_back({l.number, u, v});
  }
  return out;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

} // namespace

ParsedDataset parse_tudataset(const TUDatasetFiles& files) {
  ParsedDataset ds;
  ds.name = files.name;
  const NodeLayout layout = read_indicator(files.file("graph_indicator"));
  const auto num_graphs = layout.first.size();

  const auto labels_path = files.file("graph_labels");
  ds.graph_labels = single_column(labels_path);
  if (ds.graph_labels.size() != num_graphs) {
    throw ParseError(labels_path, 0,
                     std::to_string(ds.graph_labels.size()) + " graph labels for " + std::to_string(num_graphs) +
                         " graphs in the indicator");
  }
  ds.class_values = ds.graph_labels;
  std::sort(ds.class_values.begin(), ds.class_values.end());
  ds.class_values.erase(std::unique(ds.class_values.begin(), ds.class_values.end()), ds.class_values.end());

  ds.adjacency.reserve(num_graphs);
  for (std::size_t g = 0; g < num_graphs; ++g) {
    const auto n = static_cast<Index>(layout.count[g]);
    ds.adjacency.push_back(Matrix::Zero(n, n));
  }
  for (const auto& e : read_edges(files.file("A"), layout)) {
    if (e.u == e.v) continue;
    const auto g = layout.graph_of[e.u];
    const auto i = static_cast<Index>(e.u - layout.first[g]);
    const auto j = static_cast<Index>(e.v - layout.first[g]);
    ds.adjacency[g](i, j) = 1.0;
    ds.adjacency[g](j, i) = 1.0;
  }

  if (files.has_node_labels()) {
    const auto path = files.file("node_labels");
    const auto raw = single_column(path);
    if (raw.size() != layout.graph_of.size()) {
      throw ParseError(path, 0,
                       std::to_string(raw.size()) + " node labels for " + std::to_string(layout.graph_of.size()) +
                           " nodes in the indicator");
    }
    ds.node_labels.resize(num_graphs);
    for (std::size_t u = 0; u < raw.size(); ++u) ds.node_labels[layout.graph_of[u]].push_back(raw[u]);
  }
  return ds;
}

void write_tudataset(const ParsedDataset& ds, const TUDatasetFiles& files) {
  fs::create_directories(files.dir);
  std::ostringstream a, ind, gl, nl;
  std::size_t offset = 1;
  for (std::size_t g = 0; g < ds.size(); ++g) {
    const Matrix& adj = ds.adjacency[g];
    for (Index i = 0; i < adj.rows(); ++i) {
      ind << g + 1 << '\n';
      for (Index j = 0; j < adj.cols(); ++j) {
        if (i != j && adj(i, j) != 0.0) a << offset + static_cast<std::size_t>(i) << ", " << offset + static_cast<std::size_t>(j) << '\n';
      }
    }
    gl << ds.graph_labels[g] << '\n';
    if (ds.has_node_labels()) {
      for (long l : ds.node_labels[g]) nl << l << '\n';
    }
    offset += static_cast<std::size_t>(adj.rows());
  }
  write_file(files.file("A"), a.str());
  write_file(files.file("graph_indicator"), ind.str());
  write_file(files.file("graph_labels"), gl.str());
  if (ds.has_node_labels()) write_file(files.file("node_labels"), nl.str());
}

std::string to_string(FeatureMode m) { return m == FeatureMode::one_hot_labels ? "labels" : "degree"; }

FeatureMode parse_feature_mode(const std::string& s, const ParsedDataset& ds) {
  if (s == "labels") return FeatureMode::one_hot_labels;
  if (s == "degree") return FeatureMode::one_hot_degree;
  if (s == "auto") return ds.has_node_labels() ? FeatureMode::one_hot_labels : FeatureMode::one_hot_degree;
  throw std::invalid_argument("unknown feature mode '" + s + "' (expected labels, degree or auto)");
}

GraphDataset encode_node_features(const ParsedDataset& ds, FeatureMode mode) {
  GraphDataset out;
  out.name = ds.name;
  out.num_classes = static_cast<Index>(ds.class_values.size());
  std::map<long, Index> slot;
  if (mode == FeatureMode::one_hot_labels) {
    if (!ds.has_node_labels()) throw std::invalid_argument(ds.name + ": node labels missing; use degree features");
    std::set<long> values;
    for (const auto& g : ds.node_labels) values.insert(g.begin(), g.end());
    for (long v : values) slot.emplace(v, static_cast<Index>(slot.size()));
    out.feature_dim = static_cast<Index>(slot.size());
  } else {
    Index max_degree = 0;
    for (const auto& adj : ds.adjacency) {
      if (adj.rows() > 0) max_degree = std::max(max_degree, static_cast<Index>(adj.rowwise().sum().maxCoeff()));
    }
    out.feature_dim = max_degree + 1;
  }
  out.items.reserve(ds.size());
  for (std::size_t g = 0; g < ds.size(); ++g) {
    const Matrix& adj = ds.adjacency[g];
    Matrix v = Matrix::Zero(adj.rows(), out.feature_dim);
    for (Index i = 0; i < adj.rows(); ++i) {
      const Index col = mode == FeatureMode::one_hot_labels
                            ? slot.at(ds.node_labels[g][static_cast<std::size_t>(i)])
                            : static_cast<Index>(adj.row(i).sum());
      v(i, col) = 1.0;
    }
    out.items.push_back({Graph(std::move(v), adj), LabelDistribution::one_hot(ds.class_index(g), out.num_classes)});
  }
  return out;
}

GraphDataset load_tudataset(const TUDatasetFiles& files, const std::string& features) {
  const ParsedDataset parsed = parse_tudataset(files);
  return encode_node_features(parsed, parse_feature_mode(features, parsed));
}

std::optional<ReferenceStats> reference_stats(const std::string& name) {
  static const std::vector<ReferenceStats> table = {
      {"PTC_MR", 334, 14.3, 29.4, 18, 2},    {"NCI109", 4127, 29.7, 64.3, 38, 2},
      {"NCI1", 4110, 29.9, 64.6, 37, 2},     {"MUTAG", 188, 17.9, 39.6, 7, 2},
      {"ENZYMES", 600, 32.6, 124.3, 3, 6},   {"PROTEINS", 1113, 39.1, 145.6, 3, 2},
      {"IMDB-MULTI", 1500, 13.0, 65.9, std::nullopt, 3},
      {"IMDB-BINARY", 1000, 19.8, 96.5, std::nullopt, 2},
  };
  std::string key = name;
  if (key == "IMDB-M") key = "IMDB-MULTI";
  if (key == "IMDB-B") key = "IMDB-BINARY";
  for (const auto& r : table) {
    if (r.name == key) return r;
  }
  return std::nullopt;
}

bool DatasetStats::all_pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const StatCheck& c) { return c.pass; });
}

DatasetStats dataset_stats(const GraphDataset& ds) {
  DatasetStats s;
  s.name = ds.name;
  s.stats = degree_stats(ds);
  s.reference = reference_stats(ds.name);
  if (!s.reference) return s;
  const auto& r = *s.reference;
  auto check = [&](std::string field, double expected, double actual, double tol) {
    s.checks.push_back({std::move(field), expected, actual, tol, std::abs(expected - actual) <= tol + 1e-12});
  };
  check("graphs", static_cast<double>(r.graphs), static_cast<double>(s.stats.graphs), 0.0);
  check("mean_nodes", r.mean_nodes, s.stats.mean_nodes, 0.1);
  check("mean_edges", r.mean_edges / 2.0, s.stats.mean_edges, 0.1);
  if (r.feature_dim) check("feature_dim", static_cast<double>(*r.feature_dim), static_cast<double>(s.stats.feature_dim), 0.0);
  check("classes", static_cast<double>(r.num_classes), static_cast<double>(s.stats.num_classes), 0.0);
  return s;
}

std::string format_stats_text(const DatasetStats& s) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(2);
  os << "dataset:    " << s.name << '\n';
  os << "graphs:     " << s.stats.graphs << '\n';
  os << "mean nodes: " << s.stats.mean_nodes << '\n';
  os << "mean edges: " << s.stats.mean_edges << "  (undirected)\n";
  os << "features:   " << s.stats.feature_dim << '\n';
  os << "classes:    " << s.stats.num_classes << '\n';
  if (s.reference) {
    os << "\nreference comparison (published edge figure halved):\n";
    for (const auto& c : s.checks) {
      os << "  " << std::left << std::setw(12) << c.field << std::right << std::setw(10) << c.expected
         << std::setw(10) << c.actual << "  tol " << c.tolerance << "  " << (c.pass ? "PASS" : "FAIL") << '\n';
    }
  }
  return os.str();
}

std::string stats_to_json(const DatasetStats& s) {
  nlohmann::ordered_json j;
  j["dataset"] = s.name;
  j["graphs"] = s.stats.graphs;
  j["mean_nodes"] = s.stats.mean_nodes;
  j["mean_edges"] = s.stats.mean_edges;
  j["feature_dim"] = s.stats.feature_dim;
  j["classes"] = s.stats.num_classes;
  if (s.reference) {
    auto& cmp = j["reference"];
    cmp["edge_convention"] = "published edge figure halved";
    for (const auto& c : s.checks) {
      cmp["checks"].push_back({{"field", c.field}, {"expected", c.expected}, {"actual", c.actual},
                               {"tolerance", c.tolerance}, {"pass", c.pass}});
    }
    cmp["pass"] = s.all_pass();
  }
  return j.dump(2);
}

// ---------------------------------------------------------------------------

void write_mixed_sample(const MixedSampleFile& m, const TUDatasetFiles& files) {
  fs::create_directories(files.dir);
  const Graph& g = m.sample.graph;
  std::ostringstream a, w, ind, attr;
  for (Index i = 0; i < g.num_nodes(); ++i) {
    ind << "1\n";
    for (Index j = 0; j < g.num_nodes(); ++j) {
      if (i != j && g.weights(i, j) != 0.0) {
        a << i + 1 << ", " << j + 1 << '\n';
        w << format_double(g.weights(i, j)) << '\n';
      }
    }
    for (Index c = 0; c < g.feature_dim(); ++c) attr << (c > 0 ? ", " : "") << format_double(g.features(i, c));
    attr << '\n';
  }
  write_file(files.file("A"), a.str());
  write_file(files.file("edge_weights"), w.str());
  write_file(files.file("graph_indicator"), ind.str());
  write_file(files.file("graph_labels"), std::to_string(m.sample.label.argmax()) + "\n");
  write_file(files.file("node_attributes"), attr.str());

  nlohmann::ordered_json j;
  j["format"] = "ifmix-mixed-sample";
  j["version"] = 1;
  j["lambda"] = m.sample.lambda;
  j["label"] = std::vector<double>(m.sample.label.p.data(), m.sample.label.p.data() + m.sample.label.p.size());
  j["source_ids"] = {m.sample.source_ids.first, m.sample.source_ids.second};
  j["source"] = {{"dir", m.source_dir}, {"name", m.source_name}, {"features", m.feature_mode}};
  auto& vocab = j["vocabulary"];
  vocab = nlohmann::ordered_json::array();
  for (Index r = 0; r < m.vocabulary.rows(); ++r) {
    std::vector<double> row(static_cast<std::size_t>(m.vocabulary.cols()));
    for (Index c = 0; c < m.vocabulary.cols(); ++c) row[static_cast<std::size_t>(c)] = m.vocabulary(r, c);
    vocab.push_back(row);
  }
  write_file(files.dir / (files.name + "_mix.json"), j.dump(1) + "\n");
}

MixedSampleFile read_mixed_sample(const TUDatasetFiles& files) {
  const NodeLayout layout = read_indicator(files.file("graph_indicator"));
  if (layout.first.size() != 1) throw ParseError(files.file("graph_indicator"), 0, "expected a single graph");
  const auto n = static_cast<Index>(layout.graph_of.size());

  const auto attr_path = files.file("node_attributes");
  const auto attr_lines = read_lines(attr_path);
  if (static_cast<Index>(attr_lines.size()) != n) {
    throw ParseError(attr_path, 0, std::to_string(attr_lines.size()) + " rows for " + std::to_string(n) + " nodes");
  }
  const auto d = static_cast<Index>(attr_lines.front().tokens.size());
  MixedSampleFile m;
  Graph& g = m.sample.graph;
  g.features.resize(n, d);
  for (Index i = 0; i < n; ++i) {
    const auto& l = attr_lines[static_cast<std::size_t>(i)];
    if (static_cast<Index>(l.tokens.size()) != d) throw ParseError(attr_path, l.number, "ragged feature row");
    for (Index c = 0; c < d; ++c) g.features(i, c) = to_double(l.tokens[static_cast<std::size_t>(c)], attr_path, l.number);
  }

  const auto edges = read_edges(files.file("A"), layout);
  const auto w_path = files.file("edge_weights");
  const auto w_lines = read_lines(w_path);
  if (w_lines.size() != edges.size()) {
    throw ParseError(w_path, 0, std::to_string(w_lines.size()) + " weights for " + std::to_string(edges.size()) + " edges");
  }
  g.weights = Matrix::Zero(n, n);
  for (std::size_t k = 0; k < edges.size(); ++k) {
    if (w_lines[k].tokens.size() != 1) throw ParseError(w_path, w_lines[k].number, "expected one weight per line");
    g.weights(static_cast<Index>(edges[k].u), static_cast<Index>(edges[k].v)) =
        to_double(w_lines[k].tokens[0], w_path, w_lines[k].number);
  }

  const auto side_path = files.dir / (files.name + "_mix.json");
  std::ifstream in(side_path);
  if (!in) throw ParseError(side_path, 0, "missing or unreadable file");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(side_path, 0, e.what());
  }
  if (j.value("format", "") != "ifmix-mixed-sample") throw ParseError(side_path, 0, "not a mixed-sample sidecar");
  m.sample.lambda = j.at("lambda").get<double>();
  const auto label = j.at("label").get<std::vector<double>>();
  m.sample.label = LabelDistribution(Eigen::Map<const Vector>(label.data(), static_cast<Index>(label.size())));
  const auto ids = j.at("source_ids").get<std::vector<std::size_t>>();
  if (ids.size() == 2) m.sample.source_ids = {ids[0], ids[1]};
  const auto& src = j.at("source");
  m.source_dir = src.value("dir", "");
  m.source_name = src.value("name", "");
  m.feature_mode = src.value("features", "auto");
  const auto vocab = j.at("vocabulary").get<std::vector<std::vector<double>>>();
  m.vocabulary.resize(static_cast<Index>(vocab.size()), d);
  for (std::size_t r = 0; r < vocab.size(); ++r) {
    if (static_cast<Index>(vocab[r].size()) != d) throw ParseError(side_path, 0, "vocabulary row width differs from features");
    for (Index c = 0; c < d; ++c) m.vocabulary(static_cast<Index>(r), c) = vocab[r][static_cast<std::size_t>(c)];
  }
  return m;
}

} // namespace ifmix
