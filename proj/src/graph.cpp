#include "mimbfd/graph.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "mimbfd/format.hpp"
#include "mimbfd/rng.hpp"

namespace mimbfd {

namespace fs = std::filesystem;
using nlohmann::json;

// ---- RelationAdjacency ------------------------------------------------------

bool RelationAdjacency::has_edge(NodeId i, NodeId j) const {
    return std::binary_search(row_begin(i), row_end(i), j);
}

RelationAdjacency RelationAdjacency::from_edges(
    NodeId n, const std::vector<std::pair<NodeId, NodeId>>& edges) {
    std::vector<std::pair<NodeId, NodeId>> sym;
    sym.reserve(edges.size() * 2);
    for (const auto& [s, d] : edges) {
        if (s < 0 || s >= n || d < 0 || d >= n)
            throw IndexError("edge endpoint (" + std::to_string(s) + "," + std::to_string(d) +
                             ") out of range for " + std::to_string(n) + " nodes");
        if (s == d) continue;  // self-loops dropped at ingestion
        sym.emplace_back(s, d);
        sym.emplace_back(d, s);
    }
    std::sort(sym.begin(), sym.end());
    sym.erase(std::unique(sym.begin(), sym.end()), sym.end());

    RelationAdjacency adj;
    adj.offsets.assign(static_cast<std::size_t>(n) + 1, 0);
    adj.indices.reserve(sym.size());
    for (const auto& [s, d] : sym) adj.offsets[static_cast<std::size_t>(s) + 1]++;
    for (NodeId i = 0; i < n; ++i) adj.offsets[i + 1] += adj.offsets[i];
    for (const auto& [s, d] : sym) adj.indices.push_back(d);
    adj.degree.resize(static_cast<std::size_t>(n));
    for (NodeId i = 0; i < n; ++i) adj.degree[i] = adj.offsets[i + 1] - adj.offsets[i];
    adj.validate();
    return adj;
}

void RelationAdjacency::validate() const {
    const NodeId n = num_nodes();
    if (offsets.size() != static_cast<std::size_t>(n) + 1)
        throw IndexError("adjacency: offsets size mismatch");
    if (offsets.front() != 0 || offsets.back() != nnz())
        throw IndexError("adjacency: offsets do not span nnz");
    for (NodeId i = 0; i < n; ++i) {
        if (offsets[i] > offsets[i + 1]) throw IndexError("adjacency: offsets not monotone");
        if (degree[i] != offsets[i + 1] - offsets[i])
            throw IndexError("adjacency: degree mismatch at node " + std::to_string(i));
        for (std::int64_t e = offsets[i]; e < offsets[i + 1]; ++e) {
            const NodeId j = indices[e];
            if (j < 0 || j >= n) throw IndexError("adjacency: column out of range");
            if (j == i) throw IndexError("adjacency: self-loop at node " + std::to_string(i));
            if (e > offsets[i] && indices[e - 1] >= j)
                throw IndexError("adjacency: row " + std::to_string(i) + " not sorted/unique");
        }
    }
}

// ---- MultiRelationGraph -----------------------------------------------------

std::int64_t MultiRelationGraph::count_label(int label) const {
    return std::count(labels.begin(), labels.end(), label);
}

void MultiRelationGraph::validate() const {
    if (features.rows != num_nodes)
        throw IndexError("graph: feature rows != num_nodes");
    if (static_cast<NodeId>(labels.size()) != num_nodes)
        throw IndexError("graph: label vector size != num_nodes");
    if (relations.size() != relation_names.size())
        throw IndexError("graph: relation count != relation name count");
    if (!features.all_finite()) throw NumericError("graph: NaN/Inf in features");
    for (int y : labels)
        if (y != kBenign && y != kFraud && y != kUnlabeled)
            throw FormatError("graph: label " + std::to_string(y) + " not in {0,1,-1}");
    for (const auto& rel : relations) {
        if (rel.num_nodes() != num_nodes)
            throw IndexError("graph: relation node count mismatch");
        rel.validate();
        // symmetry: (i,j) implies (j,i)
        for (NodeId i = 0; i < num_nodes; ++i)
            for (const NodeId* p = rel.row_begin(i); p != rel.row_end(i); ++p)
                if (!rel.has_edge(*p, i))
                    throw IndexError("graph: edge (" + std::to_string(i) + "," +
                                     std::to_string(*p) + ") lacks its reverse");
    }
}

RelationAdjacency MultiRelationGraph::relation_union() const {
    std::vector<std::pair<NodeId, NodeId>> edges;
    for (const auto& rel : relations)
        for (NodeId i = 0; i < num_nodes; ++i)
            for (const NodeId* p = rel.row_begin(i); p != rel.row_end(i); ++p)
                if (i < *p) edges.emplace_back(i, *p);
    return RelationAdjacency::from_edges(num_nodes, edges);
}

// ---- SplitAssignment --------------------------------------------------------

std::vector<NodeId> SplitAssignment::nodes_with(SplitTag t) const {
    std::vector<NodeId> out;
    for (std::size_t i = 0; i < tag.size(); ++i)
        if (tag[i] == t) out.push_back(static_cast<NodeId>(i));
    return out;
}

// ---- TransitionMatrix -------------------------------------------------------

TransitionMatrix transition_matrix(const RelationAdjacency& adj) {
    TransitionMatrix tm;
    tm.adj = adj;
    const NodeId n = adj.num_nodes();
    tm.inv_degree.assign(static_cast<std::size_t>(n), 0.0);
    for (NodeId i = 0; i < n; ++i) {
        if (adj.degree[i] > 0)
            tm.inv_degree[i] = 1.0 / static_cast<double>(adj.degree[i]);
        else
            tm.dangling.push_back(i);
    }
    return tm;
}

void TransitionMatrix::apply(const std::vector<double>& x, std::vector<double>& y) const {
    const NodeId n = num_nodes();
    y.assign(static_cast<std::size_t>(n), 0.0);
    for (NodeId i = 0; i < n; ++i) {
        double s = 0.0;
        for (const NodeId* p = adj.row_begin(i); p != adj.row_end(i); ++p)
            s += x[static_cast<std::size_t>(*p)] * inv_degree[static_cast<std::size_t>(*p)];
        y[static_cast<std::size_t>(i)] = s;
    }
}

// ---- file I/O ---------------------------------------------------------------

namespace {

double parse_double(std::string_view tok, const std::string& file, std::size_t line_no) {
    double out = 0.0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), out);
    if (ec != std::errc{} || ptr != tok.data() + tok.size())
        throw FormatError(file + ":" + std::to_string(line_no) + ": bad decimal '" +
                          std::string(tok) + "'");
    return out;
}

std::int64_t parse_int(std::string_view tok, const std::string& file, std::size_t line_no) {
    std::int64_t out = 0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), out);
    if (ec != std::errc{} || ptr != tok.data() + tok.size())
        throw FormatError(file + ":" + std::to_string(line_no) + ": bad integer '" +
                          std::string(tok) + "'");
    return out;
}

std::ifstream open_or_throw(const fs::path& p) {
    std::ifstream in(p);
    if (!in) throw FormatError("cannot open " + p.string());
    return in;
}

std::vector<std::string_view> split_on(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = s.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(s.substr(start));
            break;
        }
        out.push_back(s.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

void strip_cr(std::string& line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
}

}  // namespace

MultiRelationGraph load_graph(const fs::path& dir) {
    const fs::path meta_path = dir / "graph_meta.json";
    std::ifstream meta_in = open_or_throw(meta_path);
    json meta;
    try {
        meta_in >> meta;
    } catch (const json::exception& e) {
        throw FormatError(meta_path.string() + ": " + e.what());
    }
    MultiRelationGraph g;
    g.num_nodes = meta.at("num_nodes").get<NodeId>();
    const std::int64_t feature_dim = meta.at("feature_dim").get<std::int64_t>();
    g.relation_names = meta.at("relations").get<std::vector<std::string>>();
    if (g.num_nodes < 0 || feature_dim < 0 || g.relation_names.empty())
        throw FormatError(meta_path.string() + ": invalid meta values");

    // nodes.tsv: <node_id>\t<label>\t<f1,...,fd>
    const fs::path nodes_path = dir / "nodes.tsv";
    std::ifstream nodes_in = open_or_throw(nodes_path);
    g.features = Tensor(g.num_nodes, feature_dim);
    g.labels.assign(static_cast<std::size_t>(g.num_nodes), kUnlabeled);
    std::string line;
    std::size_t line_no = 0;
    NodeId expected_id = 0;
    while (std::getline(nodes_in, line)) {
        ++line_no;
        strip_cr(line);
        if (line.empty()) continue;
        const auto cols = split_on(line, '\t');
        if (cols.size() != 3)
            throw FormatError(nodes_path.string() + ":" + std::to_string(line_no) +
                              ": expected 3 tab-separated fields, got " +
                              std::to_string(cols.size()));
        const NodeId id = parse_int(cols[0], nodes_path.string(), line_no);
        if (id != expected_id)
            throw FormatError(nodes_path.string() + ":" + std::to_string(line_no) +
                              ": node ids must be 0..n-1 in order (saw " + std::to_string(id) +
                              ", expected " + std::to_string(expected_id) + ")");
        const std::int64_t label = parse_int(cols[1], nodes_path.string(), line_no);
        if (label != kBenign && label != kFraud && label != kUnlabeled)
            throw FormatError(nodes_path.string() + ":" + std::to_string(line_no) +
                              ": label must be 0, 1 or -1");
        g.labels[static_cast<std::size_t>(id)] = static_cast<int>(label);
        const auto feats = split_on(cols[2], ',');
        if (static_cast<std::int64_t>(feats.size()) != feature_dim)
            throw FormatError(nodes_path.string() + ":" + std::to_string(line_no) + ": expected " +
                              std::to_string(feature_dim) + " features, got " +
                              std::to_string(feats.size()));
        for (std::int64_t j = 0; j < feature_dim; ++j)
            g.features.at(id, j) = parse_double(feats[static_cast<std::size_t>(j)],
                                                nodes_path.string(), line_no);
        ++expected_id;
    }
    if (expected_id != g.num_nodes)
        throw FormatError(nodes_path.string() + ": has " + std::to_string(expected_id) +
                          " nodes, meta says " + std::to_string(g.num_nodes));

    for (const std::string& rel : g.relation_names) {
        const fs::path epath = dir / ("edges_" + rel + ".tsv");
        std::ifstream ein = open_or_throw(epath);
        std::vector<std::pair<NodeId, NodeId>> edges;
        line_no = 0;
        while (std::getline(ein, line)) {
            ++line_no;
            strip_cr(line);
            if (line.empty()) continue;
            const auto cols = split_on(line, '\t');
            if (cols.size() != 2)
                throw FormatError(epath.string() + ":" + std::to_string(line_no) +
                                  ": expected <src>\\t<dst>");
            edges.emplace_back(parse_int(cols[0], epath.string(), line_no),
                               parse_int(cols[1], epath.string(), line_no));
        }
        g.relations.push_back(RelationAdjacency::from_edges(g.num_nodes, edges));
    }
    g.validate();
    return g;
}

void save_graph(const MultiRelationGraph& g, const fs::path& dir) {
    fs::create_directories(dir);
    {
        json meta;
        meta["num_nodes"] = g.num_nodes;
        meta["feature_dim"] = g.feature_dim();
        meta["relations"] = g.relation_names;
        std::ofstream out(dir / "graph_meta.json");
        out << meta.dump(2) << "\n";
    }
    {
        std::ofstream out(dir / "nodes.tsv");
        for (NodeId i = 0; i < g.num_nodes; ++i) {
            out << i << '\t' << g.labels[static_cast<std::size_t>(i)] << '\t';
            for (std::int64_t j = 0; j < g.feature_dim(); ++j) {
                if (j) out << ',';
                out << fmt_double(g.features.at(i, j));
            }
            out << '\n';
        }
    }
    for (std::size_t r = 0; r < g.relations.size(); ++r) {
        std::ofstream out(dir / ("edges_" + g.relation_names[r] + ".tsv"));
        const auto& rel = g.relations[r];
        for (NodeId i = 0; i < g.num_nodes; ++i)
            for (const NodeId* p = rel.row_begin(i); p != rel.row_end(i); ++p)
                if (i < *p) out << i << '\t' << *p << '\n';
    }
}

// ---- splitting and resampling ----------------------------------------------

namespace {

// Largest-remainder apportionment of n items to the given ratios.
std::array<std::int64_t, 3> apportion(std::int64_t n, const std::array<double, 3>& ratios) {
    std::array<std::int64_t, 3> counts{};
    std::array<double, 3> frac{};
    std::int64_t assigned = 0;
    for (int s = 0; s < 3; ++s) {
        const double want = ratios[s] * static_cast<double>(n);
        counts[s] = static_cast<std::int64_t>(std::floor(want));
        frac[s] = want - std::floor(want);
        assigned += counts[s];
    }
    std::array<int, 3> order{0, 1, 2};
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return frac[a] > frac[b]; });
    for (int k = 0; assigned < n; ++k, ++assigned) counts[order[static_cast<std::size_t>(k % 3)]]++;
    return counts;
}

}  // namespace

SplitAssignment stratified_split(const MultiRelationGraph& g, double train_ratio,
                                 double val_ratio, double test_ratio, std::uint64_t seed) {
    if (train_ratio < 0 || val_ratio < 0 || test_ratio < 0)
        throw ConfigError("split ratios must be nonnegative");
    const double total = train_ratio + val_ratio + test_ratio;
    if (total <= 0) throw ConfigError("split ratios must sum to a positive value");
    const std::array<double, 3> ratios{train_ratio / total, val_ratio / total,
                                       test_ratio / total};

    SplitAssignment split;
    split.tag.assign(static_cast<std::size_t>(g.num_nodes), SplitTag::unlabeled);
    Rng rng(seed);
    for (int cls : {kBenign, kFraud}) {
        std::vector<NodeId> members;
        for (NodeId i = 0; i < g.num_nodes; ++i)
            if (g.labels[static_cast<std::size_t>(i)] == cls) members.push_back(i);
        if (members.empty())
            throw ConfigError("stratified_split: class " + std::to_string(cls) +
                              " has no labeled nodes");
        rng.shuffle(members);
        const auto counts = apportion(static_cast<std::int64_t>(members.size()), ratios);
        std::size_t pos = 0;
        const std::array<SplitTag, 3> tags{SplitTag::train, SplitTag::val, SplitTag::test};
        for (int s = 0; s < 3; ++s)
            for (std::int64_t k = 0; k < counts[s]; ++k)
                split.tag[static_cast<std::size_t>(members[pos++])] = tags[s];
    }
    return split;
}

MultiRelationGraph resample_imbalance(const MultiRelationGraph& g, const ResampleSpec& spec) {
    if (spec.rho < 1) throw ConfigError("resample: rho must be >= 1");
    std::vector<NodeId> benign, fraud;
    for (NodeId i = 0; i < g.num_nodes; ++i) {
        if (g.labels[static_cast<std::size_t>(i)] == kBenign) benign.push_back(i);
        if (g.labels[static_cast<std::size_t>(i)] == kFraud) fraud.push_back(i);
    }
    const auto b = static_cast<std::int64_t>(benign.size());
    const auto f = static_cast<std::int64_t>(fraud.size());
    if (b == 0 || f == 0)
        throw ConfigError("resample: need labeled nodes of both classes");

    std::vector<NodeId> keep_benign, keep_fraud;
    Rng rng(spec.seed);
    if (b >= spec.rho * f) {
        // subsample the benign majority to exactly rho * f
        keep_fraud = fraud;
        keep_benign = rng.sample_without_replacement(
            benign, static_cast<std::size_t>(spec.rho * f));
    } else {
        // majority insufficient: keep all benign, shrink the fraud side
        keep_benign = benign;
        const auto target = static_cast<std::int64_t>(
            std::nearbyint(static_cast<double>(b) / static_cast<double>(spec.rho)));
        if (target < 1) {
            const std::int64_t max_rho = 2 * b - 1;
            throw ConfigError("resample: rho=" + std::to_string(spec.rho) +
                              " unrealizable with " + std::to_string(b) + " benign / " +
                              std::to_string(f) + " fraud labeled nodes; achievable range [1, " +
                              std::to_string(max_rho) + "]");
        }
        keep_fraud = rng.sample_without_replacement(fraud, static_cast<std::size_t>(target));
    }

    MultiRelationGraph out = g;  // topology and features untouched
    out.labels.assign(static_cast<std::size_t>(g.num_nodes), kUnlabeled);
    for (NodeId i : keep_benign) out.labels[static_cast<std::size_t>(i)] = kBenign;
    for (NodeId i : keep_fraud) out.labels[static_cast<std::size_t>(i)] = kFraud;
    return out;
}

}  // namespace mimbfd
