#include "zx/nn.hpp"

#include "zx/errors.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

namespace zx::nn {

int Params::add(std::string name, Eigen::Index rows, Eigen::Index cols) {
    names.push_back(std::move(name));
    values.emplace_back(Mat::Zero(rows, cols));
    return static_cast<int>(values.size()) - 1;
}

std::size_t Params::count() const {
    std::size_t n = 0;
    for (const Mat& m: values) {
        n += static_cast<std::size_t>(m.size());
    }
    return n;
}

std::vector<Mat> Params::zeros_like() const {
    std::vector<Mat> out;
    out.reserve(values.size());
    for (const Mat& m: values) {
        out.emplace_back(Mat::Zero(m.rows(), m.cols()));
    }
    return out;
}

namespace {

Dense add_dense(Params& p, const std::string& name, int in, int out) {
    Dense d;
    d.w = p.add(name + ".W", in, out);
    d.b = p.add(name + ".b", 1, out);
    return d;
}

void build_trunk(Network& net) {
    const int H = net.cfg.width;
    for (int i = 0; i < net.cfg.layers; ++i) {
        MessageLayer L;
        L.node_in         = i == 0 ? kNodeFeatures : H;
        L.edge_in         = i == 0 ? kEdgeFeatures : H;
        const std::string base = "mp" + std::to_string(i);
        L.psi             = add_dense(net.params, base + ".psi", 2 * L.node_in + L.edge_in, H);
        L.phi             = add_dense(net.params, base + ".phi", L.node_in + H, H);
        L.theta           = add_dense(net.params, base + ".theta", L.edge_in + L.node_in, H);
        net.trunk.push_back(L);
    }
}

std::vector<Dense> build_mlp(Params& p, const std::string& name, int in, int hidden, int depth, int out) {
    std::vector<Dense> layers;
    int                width = in;
    for (int k = 0; k < depth; ++k) {
        layers.push_back(add_dense(p, name + "." + std::to_string(k), width, hidden));
        width = hidden;
    }
    layers.push_back(add_dense(p, name + "." + std::to_string(depth), width, out));
    return layers;
}

int global_input_width(const NetConfig& cfg) {
    return kGlobalFeatures + 2 * cfg.width;
}

} // namespace

Network make_policy(const NetConfig& cfg) {
    Network net;
    net.cfg       = cfg;
    net.is_policy = true;
    build_trunk(net);
    const int H     = cfg.width;
    net.node_head   = build_mlp(net.params, "node_head", H + 1, H, 1, kNodeActionKinds);
    net.edge_head   = build_mlp(net.params, "edge_head", H + 1, H, 1, kEdgeActionKinds);
    net.global_head = build_mlp(net.params, "stop_head", global_input_width(cfg), H, 2, 1);
    return net;
}

Network make_critic(const NetConfig& cfg) {
    Network net;
    net.cfg       = cfg;
    net.is_policy = false;
    build_trunk(net);
    net.global_head = build_mlp(net.params, "value_head", global_input_width(cfg), cfg.width, 2, 1);
    return net;
}

Mat orthogonal(Eigen::Index rows, Eigen::Index cols, double gain, Rng& rng) {
    const bool                       tall = rows >= cols;
    const Eigen::Index               n    = tall ? rows : cols;
    const Eigen::Index               m    = tall ? cols : rows;
    std::normal_distribution<double> normal(0.0, 1.0);
    Mat                              a(n, m);
    for (Eigen::Index j = 0; j < m; ++j) {
        for (Eigen::Index i = 0; i < n; ++i) {
            a(i, j) = normal(rng);
        }
    }
    Eigen::HouseholderQR<Mat> qr(a);
    Mat                       q = qr.householderQ() * Mat::Identity(n, m);
    const Mat                 r = qr.matrixQR().topRows(m).triangularView<Eigen::Upper>();
    for (Eigen::Index j = 0; j < m; ++j) {
        if (r(j, j) < 0) {
            q.col(j) *= -1.0;
        }
    }
    q *= gain;
    return tall ? q : Mat(q.transpose());
}

void init_orthogonal(Network& net, Rng& rng) {
    const double hidden = std::sqrt(2.0);
    auto         init   = [&](const Dense& d, double gain) {
        Mat& w = net.params.values[static_cast<std::size_t>(d.w)];
        w      = orthogonal(w.rows(), w.cols(), gain, rng);
        net.params.values[static_cast<std::size_t>(d.b)].setZero();
    };
    for (const MessageLayer& L: net.trunk) {
        init(L.psi, hidden);
        init(L.phi, hidden);
        init(L.theta, hidden);
    }
    const double headGain = net.is_policy ? 0.01 : 1.0;
    for (auto* head: {&net.node_head, &net.edge_head, &net.global_head}) {
        for (std::size_t k = 0; k < head->size(); ++k) {
            init((*head)[k], k + 1 == head->size() ? headGain : hidden);
        }
    }
}

GraphBatch make_batch(const std::vector<const Observation*>& obs) {
    GraphBatch b;
    b.num_graphs = static_cast<int>(obs.size());
    int N        = 0;
    int M        = 0;
    b.node_offset.push_back(0);
    b.edge_offset.push_back(0);
    for (const Observation* o: obs) {
        N += o->num_nodes();
        M += o->num_edges();
        b.node_offset.push_back(N);
        b.edge_offset.push_back(M);
    }
    b.nodes.resize(N, kNodeFeatures);
    b.edges.resize(M, kEdgeFeatures);
    b.edge_a.resize(static_cast<std::size_t>(M));
    b.edge_b.resize(static_cast<std::size_t>(M));
    b.node_graph.resize(static_cast<std::size_t>(N));
    b.edge_graph.resize(static_cast<std::size_t>(M));
    b.globals.resize(b.num_graphs, kGlobalFeatures);
    b.stop_counter.resize(b.num_graphs);
    for (int g = 0; g < b.num_graphs; ++g) {
        const Observation& o  = *obs[static_cast<std::size_t>(g)];
        const int          n0 = b.node_offset[static_cast<std::size_t>(g)];
        const int          e0 = b.edge_offset[static_cast<std::size_t>(g)];
        if (o.num_nodes() > 0) {
            b.nodes.middleRows(n0, o.num_nodes()) = o.node_features;
        }
        if (o.num_edges() > 0) {
            b.edges.middleRows(e0, o.num_edges()) = o.edge_features;
        }
        for (int i = 0; i < o.num_nodes(); ++i) {
            b.node_graph[static_cast<std::size_t>(n0 + i)] = g;
        }
        for (int j = 0; j < o.num_edges(); ++j) {
            const auto& [a, c]                             = o.edge_index[static_cast<std::size_t>(j)];
            b.edge_a[static_cast<std::size_t>(e0 + j)]     = n0 + a;
            b.edge_b[static_cast<std::size_t>(e0 + j)]     = n0 + c;
            b.edge_graph[static_cast<std::size_t>(e0 + j)] = g;
        }
        b.globals.row(g)   = o.globals.transpose();
        b.stop_counter[g]  = o.stop_counter;
    }
    return b;
}

namespace {

/// tanh through the vectorized exponential; std::tanh is scalar and dominates the runtime.
/// Saturates to +-1 without overflow; absolute error stays near machine precision.
void tanh_inplace(RowMat& m) {
    m = 1.0 - 2.0 / ((2.0 * m.array()).exp() + 1.0);
}

const Mat& P(const Network& net, int i) {
    return net.params.values[static_cast<std::size_t>(i)];
}

RowMat mlp_forward(const Network& net, const std::vector<Dense>& layers, RowMat in, MlpCache* cache) {
    for (std::size_t k = 0; k < layers.size(); ++k) {
        RowMat out = in * P(net, layers[k].w);
        out.rowwise() += P(net, layers[k].b).row(0);
        if (k + 1 < layers.size()) {
            tanh_inplace(out);
        }
        if (cache != nullptr) {
            cache->inputs.push_back(std::move(in));
            cache->outputs.push_back(out);
        }
        in = std::move(out);
    }
    return in;
}

RowMat mlp_backward(const Network& net, const std::vector<Dense>& layers, const MlpCache& cache, RowMat dOut,
                    Grads& grads) {
    for (std::size_t k = layers.size(); k-- > 0;) {
        if (k + 1 < layers.size()) {
            dOut.array() *= 1.0 - cache.outputs[k].array().square();
        }
        grads[static_cast<std::size_t>(layers[k].w)].noalias() += cache.inputs[k].transpose() * dOut;
        grads[static_cast<std::size_t>(layers[k].b)] += dOut.colwise().sum();
        dOut = dOut * P(net, layers[k].w).transpose();
    }
    return dOut;
}

struct TrunkResult {
    RowMat x;
    RowMat e;
};

TrunkResult trunk_forward(const Network& net, const GraphBatch& b, ForwardCache* cache) {
    RowMat    x = b.nodes;
    RowMat    e = b.edges;
    const int H = net.cfg.width;
    const auto N = x.rows();
    const auto M = e.rows();
    for (const MessageLayer& L: net.trunk) {
        const Mat& wPsi = P(net, L.psi.w);
        const Mat& wPhi = P(net, L.phi.w);
        const Mat& wTh  = P(net, L.theta.w);
        const RowMat r  = x * wPsi.topRows(L.node_in);
        const RowMat s  = x * wPsi.middleRows(L.node_in, L.node_in);
        RowMat       q  = e * wPsi.bottomRows(L.edge_in);
        q.rowwise() += P(net, L.psi.b).row(0);

        RowMat msg(2 * M, H);
        RowMat pairSum(M, L.node_in);
        for (Eigen::Index j = 0; j < M; ++j) {
            const int a         = b.edge_a[static_cast<std::size_t>(j)];
            const int c         = b.edge_b[static_cast<std::size_t>(j)];
            msg.row(2 * j)      = r.row(a) + s.row(c) + q.row(j);
            msg.row(2 * j + 1)  = r.row(c) + s.row(a) + q.row(j);
            pairSum.row(j)      = x.row(a) + x.row(c);
        }
        tanh_inplace(msg);
        RowMat summed = RowMat::Zero(N, H);
        for (Eigen::Index j = 0; j < M; ++j) {
            summed.row(b.edge_a[static_cast<std::size_t>(j)]) += msg.row(2 * j);
            summed.row(b.edge_b[static_cast<std::size_t>(j)]) += msg.row(2 * j + 1);
        }
        RowMat xo = x * wPhi.topRows(L.node_in);
        xo.noalias() += summed * wPhi.bottomRows(H);
        xo.rowwise() += P(net, L.phi.b).row(0);
        tanh_inplace(xo);

        RowMat eo = e * wTh.topRows(L.edge_in);
        eo.noalias() += pairSum * wTh.bottomRows(L.node_in);
        eo.rowwise() += P(net, L.theta.b).row(0);
        tanh_inplace(eo);

        if (cache != nullptr) {
            LayerCache c;
            c.x        = std::move(x);
            c.e        = std::move(e);
            c.messages = std::move(msg);
            c.summed   = std::move(summed);
            c.pair_sum = std::move(pairSum);
            c.x_out    = xo;
            c.e_out    = eo;
            cache->layers.push_back(std::move(c));
        }
        x = std::move(xo);
        e = std::move(eo);
    }
    return {std::move(x), std::move(e)};
}

/// dX, dE with respect to the trunk's inputs are not needed; only parameter gradients.
void trunk_backward(const Network& net, const GraphBatch& b, const ForwardCache& cache, RowMat dx, RowMat de,
                    Grads& grads) {
    const int H = net.cfg.width;
    for (std::size_t li = net.trunk.size(); li-- > 0;) {
        const MessageLayer& L  = net.trunk[li];
        const LayerCache&   c  = cache.layers[li];
        const Mat&          wPsi = P(net, L.psi.w);
        const Mat&          wPhi = P(net, L.phi.w);
        const Mat&          wTh  = P(net, L.theta.w);
        const auto          M    = c.e.rows();
        Mat&                gPsi = grads[static_cast<std::size_t>(L.psi.w)];
        Mat&                gPhi = grads[static_cast<std::size_t>(L.phi.w)];
        Mat&                gTh  = grads[static_cast<std::size_t>(L.theta.w)];

        // node update
        RowMat dz = dx.array() * (1.0 - c.x_out.array().square());
        gPhi.topRows(L.node_in).noalias() += c.x.transpose() * dz;
        gPhi.bottomRows(H).noalias() += c.summed.transpose() * dz;
        grads[static_cast<std::size_t>(L.phi.b)] += dz.colwise().sum();
        RowMat dxIn = dz * wPhi.topRows(L.node_in).transpose();
        const RowMat dSummed = dz * wPhi.bottomRows(H).transpose();

        // edge update
        RowMat dy = de.array() * (1.0 - c.e_out.array().square());
        gTh.topRows(L.edge_in).noalias() += c.e.transpose() * dy;
        gTh.bottomRows(L.node_in).noalias() += c.pair_sum.transpose() * dy;
        grads[static_cast<std::size_t>(L.theta.b)] += dy.colwise().sum();
        RowMat       deIn  = dy * wTh.topRows(L.edge_in).transpose();
        const RowMat dPair = dy * wTh.bottomRows(L.node_in).transpose();

        // messages
        RowMat dMsg(2 * M, H);
        for (Eigen::Index j = 0; j < M; ++j) {
            dMsg.row(2 * j)     = dSummed.row(b.edge_a[static_cast<std::size_t>(j)]);
            dMsg.row(2 * j + 1) = dSummed.row(b.edge_b[static_cast<std::size_t>(j)]);
        }
        dMsg.array() *= 1.0 - c.messages.array().square();
        RowMat dr = RowMat::Zero(c.x.rows(), H);
        RowMat ds = RowMat::Zero(c.x.rows(), H);
        RowMat dq(M, H);
        for (Eigen::Index j = 0; j < M; ++j) {
            const int a = b.edge_a[static_cast<std::size_t>(j)];
            const int o = b.edge_b[static_cast<std::size_t>(j)];
            dr.row(a) += dMsg.row(2 * j);
            ds.row(o) += dMsg.row(2 * j);
            dr.row(o) += dMsg.row(2 * j + 1);
            ds.row(a) += dMsg.row(2 * j + 1);
            dq.row(j) = dMsg.row(2 * j) + dMsg.row(2 * j + 1);
            dxIn.row(a) += dPair.row(j);
            dxIn.row(o) += dPair.row(j);
        }
        gPsi.topRows(L.node_in).noalias() += c.x.transpose() * dr;
        gPsi.middleRows(L.node_in, L.node_in).noalias() += c.x.transpose() * ds;
        gPsi.bottomRows(L.edge_in).noalias() += c.e.transpose() * dq;
        grads[static_cast<std::size_t>(L.psi.b)] += dq.colwise().sum();
        if (li > 0) {
            dxIn.noalias() += dr * wPsi.topRows(L.node_in).transpose();
            dxIn.noalias() += ds * wPsi.middleRows(L.node_in, L.node_in).transpose();
            deIn.noalias() += dq * wPsi.bottomRows(L.edge_in).transpose();
        }
        dx = std::move(dxIn);
        de = std::move(deIn);
    }
}

double stop_scale(const Network& net) {
    return net.cfg.use_stop_counter ? 1.0 : 0.0;
}

RowMat global_input(const Network& net, const GraphBatch& b, const RowMat& x, const RowMat& e) {
    const int H = net.cfg.width;
    RowMat    in = RowMat::Zero(b.num_graphs, kGlobalFeatures + 2 * H);
    in.leftCols(kGlobalFeatures) = b.globals;
    in.col(kGStopCounter) *= stop_scale(net);
    for (int g = 0; g < b.num_graphs; ++g) {
        const int n0 = b.node_offset[static_cast<std::size_t>(g)];
        const int n1 = b.node_offset[static_cast<std::size_t>(g) + 1];
        const int e0 = b.edge_offset[static_cast<std::size_t>(g)];
        const int e1 = b.edge_offset[static_cast<std::size_t>(g) + 1];
        if (n1 > n0) {
            in.block(g, kGlobalFeatures, 1, H) = x.middleRows(n0, n1 - n0).colwise().mean();
        }
        if (e1 > e0) {
            in.block(g, kGlobalFeatures + H, 1, H) = e.middleRows(e0, e1 - e0).colwise().mean();
        }
    }
    return in;
}

void global_input_backward(const Network& net, const GraphBatch& b, const RowMat& dIn, RowMat& dx, RowMat& de) {
    const int H = net.cfg.width;
    for (int g = 0; g < b.num_graphs; ++g) {
        const int n0 = b.node_offset[static_cast<std::size_t>(g)];
        const int n1 = b.node_offset[static_cast<std::size_t>(g) + 1];
        const int e0 = b.edge_offset[static_cast<std::size_t>(g)];
        const int e1 = b.edge_offset[static_cast<std::size_t>(g) + 1];
        if (n1 > n0) {
            const Eigen::RowVectorXd d = dIn.block(g, kGlobalFeatures, 1, H) / static_cast<double>(n1 - n0);
            dx.middleRows(n0, n1 - n0).rowwise() += d;
        }
        if (e1 > e0) {
            const Eigen::RowVectorXd d = dIn.block(g, kGlobalFeatures + H, 1, H) / static_cast<double>(e1 - e0);
            de.middleRows(e0, e1 - e0).rowwise() += d;
        }
    }
}

RowMat with_counter(const RowMat& feats, const std::vector<int>& graphOf, const Eigen::VectorXd& counter, double scale) {
    RowMat in(feats.rows(), feats.cols() + 1);
    in.leftCols(feats.cols()) = feats;
    for (Eigen::Index i = 0; i < feats.rows(); ++i) {
        in(i, feats.cols()) = scale * counter[graphOf[static_cast<std::size_t>(i)]];
    }
    return in;
}

} // namespace

void check_finite(const Network& net, const Eigen::Ref<const RowMat>& values, const char* what) {
    if (values.allFinite()) {
        return;
    }
    std::ostringstream os;
    os << "non-finite " << what << "; parameter norms:";
    for (std::size_t i = 0; i < net.params.size(); ++i) {
        os << ' ' << net.params.names[i] << '=' << net.params.values[i].norm();
    }
    throw TrainingFault(os.str());
}

PolicyOutput forward_policy(const Network& net, const GraphBatch& b, ForwardCache* cache) {
    if (!net.is_policy) {
        throw ContractError("forward_policy on a critic network");
    }
    TrunkResult  t = trunk_forward(net, b, cache);
    PolicyOutput out;
    const double sc = stop_scale(net);
    out.node_logits = mlp_forward(net, net.node_head, with_counter(t.x, b.node_graph, b.stop_counter, sc),
                                  cache != nullptr ? &cache->node_mlp : nullptr);
    out.edge_logits = mlp_forward(net, net.edge_head, with_counter(t.e, b.edge_graph, b.stop_counter, sc),
                                  cache != nullptr ? &cache->edge_mlp : nullptr);
    const RowMat stop = mlp_forward(net, net.global_head, global_input(net, b, t.x, t.e),
                                    cache != nullptr ? &cache->global_mlp : nullptr);
    out.stop_logits   = stop.col(0);
    check_finite(net, out.node_logits, "node logits");
    check_finite(net, out.edge_logits, "edge logits");
    check_finite(net, stop, "stop logits");
    if (cache != nullptr) {
        cache->x_final = std::move(t.x);
        cache->e_final = std::move(t.e);
    }
    return out;
}

Eigen::VectorXd forward_critic(const Network& net, const GraphBatch& b, ForwardCache* cache) {
    if (net.is_policy) {
        throw ContractError("forward_critic on a policy network");
    }
    TrunkResult  t = trunk_forward(net, b, cache);
    const RowMat v = mlp_forward(net, net.global_head, global_input(net, b, t.x, t.e),
                                 cache != nullptr ? &cache->global_mlp : nullptr);
    check_finite(net, v, "value");
    if (cache != nullptr) {
        cache->x_final = std::move(t.x);
        cache->e_final = std::move(t.e);
    }
    return v.col(0);
}

void backward_policy(const Network& net, const GraphBatch& b, const ForwardCache& cache, const RowMat& dNode,
                     const RowMat& dEdge, const Eigen::VectorXd& dStop, Grads& grads) {
    const int H  = net.cfg.width;
    RowMat    dn = mlp_backward(net, net.node_head, cache.node_mlp, dNode, grads);
    RowMat    de = mlp_backward(net, net.edge_head, cache.edge_mlp, dEdge, grads);
    RowMat    dx = dn.leftCols(H);
    RowMat    dEdgeFeat = de.leftCols(H);
    const RowMat dg = mlp_backward(net, net.global_head, cache.global_mlp, RowMat(dStop), grads);
    global_input_backward(net, b, dg, dx, dEdgeFeat);
    trunk_backward(net, b, cache, std::move(dx), std::move(dEdgeFeat), grads);
}

void backward_critic(const Network& net, const GraphBatch& b, const ForwardCache& cache,
                     const Eigen::VectorXd& dValue, Grads& grads) {
    RowMat       dx = RowMat::Zero(cache.x_final.rows(), cache.x_final.cols());
    RowMat       de = RowMat::Zero(cache.e_final.rows(), cache.e_final.cols());
    const RowMat dg = mlp_backward(net, net.global_head, cache.global_mlp, RowMat(dValue), grads);
    global_input_backward(net, b, dg, dx, de);
    trunk_backward(net, b, cache, std::move(dx), std::move(de), grads);
}

Eigen::VectorXd flat_logits(const PolicyOutput& out, const GraphBatch& b, int g) {
    const int       n0 = b.node_offset[static_cast<std::size_t>(g)];
    const int       V  = b.node_offset[static_cast<std::size_t>(g) + 1] - n0;
    const int       e0 = b.edge_offset[static_cast<std::size_t>(g)];
    const int       E  = b.edge_offset[static_cast<std::size_t>(g) + 1] - e0;
    Eigen::VectorXd f(num_actions(V, E));
    for (int i = 0; i < V; ++i) {
        f.segment(kNodeActionKinds * i, kNodeActionKinds) = out.node_logits.row(n0 + i).transpose();
    }
    for (int j = 0; j < E; ++j) {
        f.segment(kNodeActionKinds * V + kEdgeActionKinds * j, kEdgeActionKinds) = out.edge_logits.row(e0 + j).transpose();
    }
    f[f.size() - 1] = out.stop_logits[g];
    return f;
}

void scatter_flat(const Eigen::VectorXd& dFlat, const GraphBatch& b, int g, RowMat& dNode, RowMat& dEdge,
                  Eigen::VectorXd& dStop) {
    const int n0 = b.node_offset[static_cast<std::size_t>(g)];
    const int V  = b.node_offset[static_cast<std::size_t>(g) + 1] - n0;
    const int e0 = b.edge_offset[static_cast<std::size_t>(g)];
    const int E  = b.edge_offset[static_cast<std::size_t>(g) + 1] - e0;
    for (int i = 0; i < V; ++i) {
        dNode.row(n0 + i) += dFlat.segment(kNodeActionKinds * i, kNodeActionKinds).transpose();
    }
    for (int j = 0; j < E; ++j) {
        dEdge.row(e0 + j) += dFlat.segment(kNodeActionKinds * V + kEdgeActionKinds * j, kEdgeActionKinds).transpose();
    }
    dStop[g] += dFlat[dFlat.size() - 1];
}

Eigen::VectorXd masked_log_softmax(const Eigen::VectorXd& logits, const std::vector<std::uint8_t>& mask) {
    if (static_cast<std::size_t>(logits.size()) != mask.size()) {
        throw ContractError("mask size differs from logits");
    }
    double hi = -std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < logits.size(); ++i) {
        if (mask[static_cast<std::size_t>(i)] != 0) {
            hi = std::max(hi, logits[i]);
        }
    }
    if (!std::isfinite(hi)) {
        throw ContractError("every action is masked");
    }
    double sum = 0.0;
    for (Eigen::Index i = 0; i < logits.size(); ++i) {
        if (mask[static_cast<std::size_t>(i)] != 0) {
            sum += std::exp(logits[i] - hi);
        }
    }
    const double    lse = hi + std::log(sum);
    Eigen::VectorXd out(logits.size());
    for (Eigen::Index i = 0; i < logits.size(); ++i) {
        out[i] = mask[static_cast<std::size_t>(i)] != 0 ? logits[i] - lse : -std::numeric_limits<double>::infinity();
    }
    return out;
}

Eigen::VectorXd masked_probs(const Eigen::VectorXd& logp, const std::vector<std::uint8_t>& mask) {
    Eigen::VectorXd p = Eigen::VectorXd::Zero(logp.size());
    for (Eigen::Index i = 0; i < logp.size(); ++i) {
        if (mask[static_cast<std::size_t>(i)] != 0) {
            p[i] = std::exp(logp[i]);
        }
    }
    return p;
}

Eigen::VectorXd policy_logits(const Network& net, const Observation& obs) {
    const GraphBatch b = make_batch({&obs});
    return flat_logits(forward_policy(net, b), b, 0);
}

double critic_value(const Network& net, const Observation& obs) {
    const GraphBatch b = make_batch({&obs});
    return forward_critic(net, b)[0];
}

double global_norm(const Grads& g) {
    double s = 0.0;
    for (const Mat& m: g) {
        s += m.squaredNorm();
    }
    return std::sqrt(s);
}

// --- optimizer --------------------------------------------------------------------------------

AdamState make_adam(const Params& p) {
    return {p.zeros_like(), p.zeros_like(), 0};
}

void adam_step(Params& p, const Grads& g, AdamState& s, const AdamConfig& cfg) {
    ++s.t;
    const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(s.t));
    const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(s.t));
    for (std::size_t i = 0; i < p.values.size(); ++i) {
        s.m[i] = cfg.beta1 * s.m[i] + (1.0 - cfg.beta1) * g[i];
        s.v[i] = cfg.beta2 * s.v[i] + (1.0 - cfg.beta2) * g[i].cwiseAbs2();
        p.values[i].array() -= cfg.lr * (s.m[i].array() / c1) / ((s.v[i].array() / c2).sqrt() + cfg.epsilon);
    }
}

// --- checkpoints ------------------------------------------------------------------------------

namespace {

static_assert(std::endian::native == std::endian::little, "checkpoint encoding assumes a little-endian host");

constexpr char          kMagic[4] = {'Z', 'X', 'N', 'N'};
constexpr std::uint32_t kVersion  = 1;

template <class T>
void put_raw(std::string& out, T v) {
    char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    out.append(buf, sizeof(T));
}

void put_string(std::string& out, const std::string& s) {
    put_raw<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
    out += s;
}

class Reader {
public:
    explicit Reader(const std::string& s) : s_(s) {}
    template <class T>
    T get() {
        need(sizeof(T));
        T v;
        std::memcpy(&v, s_.data() + pos_, sizeof(T));
        pos_ += sizeof(T);
        return v;
    }
    std::string string() {
        const auto n = get<std::uint32_t>();
        need(n);
        std::string out = s_.substr(pos_, n);
        pos_ += n;
        return out;
    }
    void bytes(void* dst, std::size_t n) {
        need(n);
        std::memcpy(dst, s_.data() + pos_, n);
        pos_ += n;
    }
    [[nodiscard]] bool done() const { return pos_ == s_.size(); }

private:
    void need(std::size_t n) const {
        if (pos_ + n > s_.size()) {
            throw InputError("checkpoint truncated at byte " + std::to_string(pos_));
        }
    }
    const std::string& s_;
    std::size_t        pos_ = 0;
};

} // namespace

void Checkpoint::put(const std::string& name, const Mat& m) {
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (names[i] == name) {
            tensors[i] = m;
            return;
        }
    }
    names.push_back(name);
    tensors.push_back(m);
}

const Mat* Checkpoint::find(const std::string& name) const {
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (names[i] == name) {
            return &tensors[i];
        }
    }
    return nullptr;
}

void Checkpoint::set_counter(const std::string& name, std::int64_t v) {
    for (auto& [n, value]: counters) {
        if (n == name) {
            value = v;
            return;
        }
    }
    counters.emplace_back(name, v);
}

std::int64_t Checkpoint::counter(const std::string& name, std::int64_t fallback) const {
    for (const auto& [n, value]: counters) {
        if (n == name) {
            return value;
        }
    }
    return fallback;
}

std::string encode_checkpoint(const Checkpoint& c) {
    std::string out(kMagic, 4);
    put_raw<std::uint32_t>(out, kVersion);
    put_raw<std::uint32_t>(out, static_cast<std::uint32_t>(c.counters.size()));
    for (const auto& [name, v]: c.counters) {
        put_string(out, name);
        put_raw<std::int64_t>(out, v);
    }
    put_raw<std::uint32_t>(out, static_cast<std::uint32_t>(c.tensors.size()));
    for (std::size_t i = 0; i < c.tensors.size(); ++i) {
        const Mat& m = c.tensors[i];
        put_string(out, c.names[i]);
        put_raw<std::uint32_t>(out, 2);
        put_raw<std::uint64_t>(out, static_cast<std::uint64_t>(m.rows()));
        put_raw<std::uint64_t>(out, static_cast<std::uint64_t>(m.cols()));
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
            for (Eigen::Index col = 0; col < m.cols(); ++col) {
                put_raw<double>(out, m(r, col));
            }
        }
    }
    return out;
}

Checkpoint decode_checkpoint(const std::string& bytes) {
    Reader r(bytes);
    char   magic[4];
    r.bytes(magic, 4);
    if (std::memcmp(magic, kMagic, 4) != 0) {
        throw InputError("not a checkpoint (bad magic)");
    }
    const auto version = r.get<std::uint32_t>();
    if (version != kVersion) {
        throw InputError("unsupported checkpoint version " + std::to_string(version));
    }
    Checkpoint c;
    const auto nc = r.get<std::uint32_t>();
    for (std::uint32_t i = 0; i < nc; ++i) {
        std::string name = r.string();
        c.counters.emplace_back(std::move(name), r.get<std::int64_t>());
    }
    const auto nt = r.get<std::uint32_t>();
    for (std::uint32_t i = 0; i < nt; ++i) {
        std::string name = r.string();
        const auto  ndim = r.get<std::uint32_t>();
        if (ndim != 2) {
            throw InputError("tensor " + name + ": expected 2 dimensions, found " + std::to_string(ndim));
        }
        const auto rows = r.get<std::uint64_t>();
        const auto cols = r.get<std::uint64_t>();
        Mat        m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
        for (Eigen::Index a = 0; a < m.rows(); ++a) {
            for (Eigen::Index b = 0; b < m.cols(); ++b) {
                m(a, b) = r.get<double>();
            }
        }
        c.names.push_back(std::move(name));
        c.tensors.push_back(std::move(m));
    }
    if (!r.done()) {
        throw InputError("trailing bytes after checkpoint");
    }
    return c;
}

void save_checkpoint(const std::string& path, const Checkpoint& c) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary);
        if (!os) {
            throw InputError("cannot write " + tmp);
        }
        const std::string bytes = encode_checkpoint(c);
        os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!os) {
            throw InputError("write failed: " + tmp);
        }
    }
    std::rename(tmp.c_str(), path.c_str());
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) {
        throw InputError("cannot open checkpoint " + path);
    }
    std::ostringstream ss;
    ss << is.rdbuf();
    return decode_checkpoint(ss.str());
}

void store_params(Checkpoint& c, const std::string& prefix, const Params& p) {
    for (std::size_t i = 0; i < p.size(); ++i) {
        c.put(prefix + p.names[i], p.values[i]);
    }
}

void load_params(const Checkpoint& c, const std::string& prefix, Params& p) {
    for (std::size_t i = 0; i < p.size(); ++i) {
        const Mat* m = c.find(prefix + p.names[i]);
        if (m == nullptr) {
            throw InputError("checkpoint lacks tensor " + prefix + p.names[i]);
        }
        if (m->rows() != p.values[i].rows() || m->cols() != p.values[i].cols()) {
            throw InputError("checkpoint tensor " + prefix + p.names[i] + " has the wrong shape");
        }
        p.values[i] = *m;
    }
}

} // namespace zx::nn
