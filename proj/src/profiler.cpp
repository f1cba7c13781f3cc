#include "mimbfd/profiler.hpp"

#include <algorithm>
#include <fstream>

#include "mimbfd/format.hpp"

namespace mimbfd {

std::vector<double> closeness_centrality(const RelationAdjacency& adj) {
    const NodeId n = adj.num_nodes();
    std::vector<double> cc(static_cast<std::size_t>(n), 0.0);
    std::vector<std::int64_t> dist(static_cast<std::size_t>(n));
    std::vector<NodeId> frontier;
    for (NodeId s = 0; s < n; ++s) {
        std::fill(dist.begin(), dist.end(), -1);
        dist[static_cast<std::size_t>(s)] = 0;
        frontier.assign(1, s);
        std::int64_t reachable = 1, dist_sum = 0;
        while (!frontier.empty()) {
            std::vector<NodeId> next;
            for (NodeId u : frontier) {
                for (const NodeId* p = adj.row_begin(u); p != adj.row_end(u); ++p) {
                    if (dist[static_cast<std::size_t>(*p)] >= 0) continue;
                    dist[static_cast<std::size_t>(*p)] = dist[static_cast<std::size_t>(u)] + 1;
                    dist_sum += dist[static_cast<std::size_t>(*p)];
                    ++reachable;
                    next.push_back(*p);
                }
            }
            frontier = std::move(next);
        }
        if (dist_sum > 0)
            cc[static_cast<std::size_t>(s)] =
                static_cast<double>(reachable - 1) / static_cast<double>(dist_sum);
    }
    return cc;
}

std::vector<double> degree_centrality(const RelationAdjacency& adj) {
    const NodeId n = adj.num_nodes();
    if (n < 2) throw ConfigError("degree_centrality: need at least 2 nodes");
    std::vector<double> dc(static_cast<std::size_t>(n));
    for (NodeId i = 0; i < n; ++i)
        dc[static_cast<std::size_t>(i)] =
            static_cast<double>(adj.degree[static_cast<std::size_t>(i)]) /
            static_cast<double>(n - 1);
    return dc;
}

CentralityProfile neighbor_composition_histogram(const MultiRelationGraph& g,
                                                 const RelationAdjacency& adj,
                                                 const std::vector<double>& centrality,
                                                 int num_bins) {
    if (num_bins < 1) throw ConfigError("histogram: need at least 1 bin");
    if (centrality.size() != static_cast<std::size_t>(g.num_nodes))
        throw ShapeError("histogram: centrality vector length mismatch");
    std::vector<NodeId> benign;
    for (NodeId i = 0; i < g.num_nodes; ++i)
        if (g.labels[static_cast<std::size_t>(i)] == kBenign) benign.push_back(i);
    if (benign.empty()) throw ConfigError("histogram: no labeled benign nodes to profile");

    double lo = centrality[static_cast<std::size_t>(benign[0])], hi = lo;
    for (NodeId i : benign) {
        lo = std::min(lo, centrality[static_cast<std::size_t>(i)]);
        hi = std::max(hi, centrality[static_cast<std::size_t>(i)]);
    }
    const double width = hi - lo;

    CentralityProfile prof;
    prof.bin_lo.resize(static_cast<std::size_t>(num_bins));
    prof.bin_hi.resize(static_cast<std::size_t>(num_bins));
    prof.count_benign.assign(static_cast<std::size_t>(num_bins), 0);
    prof.mean_fraud_neighbors.assign(static_cast<std::size_t>(num_bins), 0.0);
    prof.mean_benign_neighbors.assign(static_cast<std::size_t>(num_bins), 0.0);
    for (int b = 0; b < num_bins; ++b) {
        prof.bin_lo[static_cast<std::size_t>(b)] = lo + width * b / num_bins;
        prof.bin_hi[static_cast<std::size_t>(b)] = lo + width * (b + 1) / num_bins;
    }

    for (NodeId i : benign) {
        int b = 0;
        if (width > 0.0) {
            const double x = (centrality[static_cast<std::size_t>(i)] - lo) / width;
            b = std::min(num_bins - 1, static_cast<int>(x * num_bins));
        }
        std::int64_t fraud_nb = 0, benign_nb = 0;
        for (const NodeId* p = adj.row_begin(i); p != adj.row_end(i); ++p) {
            const int y = g.labels[static_cast<std::size_t>(*p)];
            if (y == kFraud) ++fraud_nb;
            if (y == kBenign) ++benign_nb;
        }
        prof.count_benign[static_cast<std::size_t>(b)]++;
        prof.mean_fraud_neighbors[static_cast<std::size_t>(b)] += static_cast<double>(fraud_nb);
        prof.mean_benign_neighbors[static_cast<std::size_t>(b)] += static_cast<double>(benign_nb);
    }
    for (int b = 0; b < num_bins; ++b) {
        const auto cnt = prof.count_benign[static_cast<std::size_t>(b)];
        if (cnt > 0) {
            prof.mean_fraud_neighbors[static_cast<std::size_t>(b)] /= static_cast<double>(cnt);
            prof.mean_benign_neighbors[static_cast<std::size_t>(b)] /= static_cast<double>(cnt);
        }
    }
    return prof;
}

void write_profile_csv(const std::filesystem::path& file, const CentralityProfile& profile) {
    std::ofstream out(file);
    if (!out) throw FormatError("cannot write " + file.string());
    out << "bin_lo,bin_hi,count_benign_nodes,mean_fraud_neighbors,mean_benign_neighbors\n";
    for (std::size_t b = 0; b < profile.bin_lo.size(); ++b)
        out << fmt_double(profile.bin_lo[b]) << ',' << fmt_double(profile.bin_hi[b]) << ','
            << profile.count_benign[b] << ',' << fmt_double(profile.mean_fraud_neighbors[b])
            << ',' << fmt_double(profile.mean_benign_neighbors[b]) << '\n';
}

}  // namespace mimbfd
