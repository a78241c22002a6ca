#ifndef UNIDEX_SCENE_MODEL_HPP
#define UNIDEX_SCENE_MODEL_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "unidex/error.hpp"
#include "unidex/polytope.hpp"
#include "unidex/random.hpp"
#include "unidex/spec_parser.hpp"

namespace unidex::scene {

/// Axis-aligned size of an object class in meters: width (x), depth (y), height (z).
struct ObjectClass {
    std::string name;
    std::array<double, 3> extent{};

    double width() const { return extent[0]; }
    double depth() const { return extent[1]; }
    double height() const { return extent[2]; }
};

class ClassTable {
public:
    static ClassTable defaults() {
        ClassTable t;
        t.classes_["Table"] = {"Table", {1.0, 1.0, 0.7}};
        t.classes_["Robot"] = {"Robot", {0.2, 0.2, 0.6}};
        t.classes_["Tray"] = {"Tray", {0.3, 0.2, 0.05}};
        t.classes_["Cube"] = {"Cube", {0.05, 0.05, 0.05}};
        return t;
    }

    /// Defaults overridden by `{ "Tray": {"extent": [w, d, h]}, ... }`.
    static ClassTable from_json(const nlohmann::json& doc) {
        ClassTable t = defaults();
        if (!doc.is_object()) {
            throw ParseError(ParseErrorKind::InvalidArgument, "class table must be a JSON object");
        }
        for (const auto& [name, entry] : doc.items()) {
            if (!t.classes_.contains(name)) {
                throw ParseError(ParseErrorKind::UnknownClass, "class table entry for unknown class '" + name + "'");
            }
            if (!entry.is_object() || !entry.contains("extent")) continue;
            const auto& ext = entry.at("extent");
            if (!ext.is_array() || ext.size() != 3) {
                throw ParseError(ParseErrorKind::InvalidArgument, "extent of '" + name + "' must have 3 numbers");
            }
            ObjectClass cls{name, {}};
            for (std::size_t i = 0; i < 3; ++i) {
                if (!ext[i].is_number()) {
                    throw ParseError(ParseErrorKind::InvalidArgument, "extent of '" + name + "' must be numeric");
                }
                cls.extent[i] = ext[i].get<double>();
                if (!(cls.extent[i] > 0.0) || !std::isfinite(cls.extent[i])) {
                    throw ParseError(ParseErrorKind::InvalidArgument,
                                     "extent of '" + name + "' must be strictly positive");
                }
            }
            t.classes_[name] = cls;
        }
        return t;
    }

    static ClassTable from_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ParseError(ParseErrorKind::Io, "cannot read class table '" + path + "'");
        try {
            return from_json(nlohmann::json::parse(in));
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(ParseErrorKind::InvalidArgument, "class table '" + path + "': " + e.what());
        }
    }

    const ObjectClass& at(const std::string& name) const {
        const auto it = classes_.find(name);
        if (it == classes_.end()) throw ParseError(ParseErrorKind::UnknownClass, "unknown class '" + name + "'");
        return it->second;
    }

private:
    std::map<std::string, ObjectClass> classes_;
};

/// constant + sum_k coeff_k * x_k over global free dimensions.
struct Affine {
    double constant = 0.0;
    std::map<std::size_t, double> terms;

    static Affine of(double c) { return Affine{c, {}}; }
    static Affine dim(std::size_t k) { return Affine{0.0, {{k, 1.0}}}; }

    Affine operator+(const Affine& o) const {
        Affine r = *this;
        r.constant += o.constant;
        for (const auto& [k, v] : o.terms) r.terms[k] += v;
        return r;
    }
    Affine operator-(const Affine& o) const { return *this + o * -1.0; }
    Affine operator+(double c) const { return Affine{constant + c, terms}; }
    Affine operator-(double c) const { return Affine{constant - c, terms}; }
    Affine operator*(double s) const {
        Affine r{constant * s, terms};
        for (auto& [k, v] : r.terms) v *= s;
        return r;
    }

    double evaluate(const Eigen::VectorXd& x) const {
        double v = constant;
        for (const auto& [k, c] : terms) v += c * x(static_cast<Eigen::Index>(k));
        return v;
    }
};

/// Column metadata: which object property and axis a design column holds.
struct DimMeta {
    std::string object;
    std::string property;
    std::string axis;

    std::string name() const { return object + "." + property + "." + axis; }
    friend bool operator==(const DimMeta&, const DimMeta&) = default;
};

/// Region over an object's k own free axes whose offsets depend affinely on p
/// parent dimensions: { x : A x + B v + c <= 0 }.
struct ParametricRegion {
    std::vector<std::size_t> own_dims;
    std::vector<std::size_t> parent_dims;
    Eigen::MatrixXd A;
    Eigen::MatrixXd B;
    Eigen::VectorXd c;

    std::size_t rows() const { return static_cast<std::size_t>(A.rows()); }

    /// Instantiate with parent values taken from a full d-vector.
    geom::Polytope instantiate(const Eigen::VectorXd& values) const {
        Eigen::VectorXd v(static_cast<Eigen::Index>(parent_dims.size()));
        for (std::size_t i = 0; i < parent_dims.size(); ++i) {
            v(static_cast<Eigen::Index>(i)) = values(static_cast<Eigen::Index>(parent_dims[i]));
        }
        const Eigen::VectorXd offset = parent_dims.empty() ? c : Eigen::VectorXd(B * v + c);
        return geom::Polytope(A, offset);
    }
};

struct ObjectNode {
    std::string name;
    std::string class_name;
    std::array<double, 3> extent{};
    Affine x, y, z;  // base center
    bool free_position = false;
    std::vector<std::size_t> dims;     // global free dims owned by this object
    std::vector<std::size_t> parents;  // node indices referenced by specifiers
    ParametricRegion region;

    double width() const { return extent[0]; }
    double depth() const { return extent[1]; }
    double height() const { return extent[2]; }
    Affine top() const { return z + height(); }
    Affine ymin() const { return y - depth() / 2.0; }
    Affine ymax() const { return y + depth() / 2.0; }
};

struct SceneGraph {
    std::vector<ObjectNode> nodes;
    std::vector<std::pair<std::size_t, std::size_t>> edges;  // (parent, child)
    std::vector<DimMeta> free_dims;
    std::vector<std::size_t> dim_owner;  // node index for each free dim

    std::size_t dim() const { return free_dims.size(); }

    std::set<std::size_t> ancestors(std::size_t node) const {
        std::set<std::size_t> out;
        std::vector<std::size_t> stack(nodes[node].parents.begin(), nodes[node].parents.end());
        while (!stack.empty()) {
            const std::size_t n = stack.back();
            stack.pop_back();
            if (!out.insert(n).second) continue;
            stack.insert(stack.end(), nodes[n].parents.begin(), nodes[n].parents.end());
        }
        return out;
    }

    /// For each free dim, the free dims that must be fixed before it.
    std::vector<std::vector<std::size_t>> dim_predecessors() const {
        std::vector<std::vector<std::size_t>> pred(dim());
        for (std::size_t k = 0; k < dim(); ++k) {
            for (std::size_t a : ancestors(dim_owner[k])) {
                pred[k].insert(pred[k].end(), nodes[a].dims.begin(), nodes[a].dims.end());
            }
            std::sort(pred[k].begin(), pred[k].end());
        }
        return pred;
    }

    std::size_t find(const std::string& name) const {
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            if (nodes[i].name == name) return i;
        }
        throw ParseError(ParseErrorKind::UnknownIdentifier, "no object named '" + name + "'");
    }
};

/// A single H-representation polytope over all d free dimensions.
struct JointDomain {
    geom::Polytope polytope;
    std::vector<DimMeta> dim_meta;

    std::size_t dim() const { return dim_meta.size(); }
};

namespace detail {

struct RowBuilder {
    std::vector<Affine> rows;  // each row: expr <= 0
    void le(const Affine& lhs, const Affine& rhs) { rows.push_back(lhs - rhs); }
};

inline geom::Polytope rows_to_polytope(const std::vector<Affine>& rows, std::size_t d) {
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(d));
    Eigen::VectorXd b(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (const auto& [k, v] : rows[r].terms) A(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k)) += v;
        b(static_cast<Eigen::Index>(r)) = rows[r].constant;
    }
    return geom::Polytope(A, b);
}

}  // namespace detail

/// Resolve deterministic placements, free dimensions, per-object regions and
/// the dependency graph.
inline SceneGraph build_scene_graph(const dsl::SceneSpec& spec, const ClassTable& classes = ClassTable::defaults()) {
    const auto report = dsl::grammar_check(spec);
    if (!report.ok()) {
        throw ParseError(ParseErrorKind::InvalidArgument, report.errors.front().message, report.errors.front().loc);
    }

    SceneGraph g;
    std::map<std::string, std::size_t> by_name;
    std::vector<Affine> all_rows;

    for (const auto& decl : spec.statements) {
        ObjectNode node;
        node.name = decl.resolved_name();
        node.class_name = decl.class_name;
        node.extent = classes.at(decl.class_name).extent;
        const std::size_t self = g.nodes.size();

        const auto target = [&](const std::string& name) -> const ObjectNode& {
            const std::size_t idx = by_name.at(name);
            if (std::find(node.parents.begin(), node.parents.end(), idx) == node.parents.end()) {
                node.parents.push_back(idx);
            }
            return g.nodes[idx];
        };

        bool has_position = false;
        bool has_relational = false;
        bool completely = false;
        for (const auto& s : decl.specifiers) {
            has_position = has_position || std::holds_alternative<dsl::OnPoint>(s.value) ||
                           std::holds_alternative<dsl::OnRegionExpr>(s.value) ||
                           std::holds_alternative<dsl::CompletelyOn>(s.value);
            completely = completely || std::holds_alternative<dsl::CompletelyOn>(s.value);
            has_relational = has_relational || std::holds_alternative<dsl::AheadOf>(s.value) ||
                             std::holds_alternative<dsl::Behind>(s.value) ||
                             std::holds_alternative<dsl::LeftOf>(s.value) ||
                             std::holds_alternative<dsl::RightOf>(s.value);
        }
        node.free_position = completely || (!has_position && has_relational);

        const auto new_dim = [&](const std::string& property, const std::string& axis) {
            const std::size_t k = g.free_dims.size();
            g.free_dims.push_back({node.name, property, axis});
            g.dim_owner.push_back(self);
            node.dims.push_back(k);
            return k;
        };

        if (node.free_position) {
            node.x = Affine::dim(new_dim("pos", "x"));
            node.y = Affine::dim(new_dim("pos", "y"));
        }

        detail::RowBuilder rows;
        for (const auto& s : decl.specifiers) {
            std::visit(
                [&](const auto& v) {
                    using T = std::decay_t<decltype(v)>;
                    if constexpr (std::is_same_v<T, dsl::OnPoint>) {
                        node.x = Affine::of(v.point.x);
                        node.y = Affine::of(v.point.y);
                        node.z = Affine::of(v.point.z);
                    } else if constexpr (std::is_same_v<T, dsl::OnRegionExpr>) {
                        const ObjectNode& t = target(v.target);
                        node.x = t.x;
                        node.y = t.ymax() - node.depth() / 2.0;
                        node.z = t.top();
                    } else if constexpr (std::is_same_v<T, dsl::CompletelyOn>) {
                        const ObjectNode& t = target(v.target);
                        node.z = t.top();
                        const double hx = (t.width() - node.width()) / 2.0;
                        const double hy = (t.depth() - node.depth()) / 2.0;
                        rows.le(node.x - t.x, Affine::of(hx));
                        rows.le(t.x - node.x, Affine::of(hx));
                        rows.le(node.y - t.y, Affine::of(hy));
                        rows.le(t.y - node.y, Affine::of(hy));
                    } else if constexpr (std::is_same_v<T, dsl::AheadOf>) {
                        const ObjectNode& t = target(v.target);
                        rows.le(node.y + node.depth() / 2.0, t.ymin());
                    } else if constexpr (std::is_same_v<T, dsl::Behind>) {
                        const ObjectNode& t = target(v.target);
                        rows.le(t.ymax(), node.y - node.depth() / 2.0);
                    } else if constexpr (std::is_same_v<T, dsl::LeftOf>) {
                        const ObjectNode& t = target(v.target);
                        rows.le(node.x + node.width() / 2.0, t.x);
                    } else if constexpr (std::is_same_v<T, dsl::RightOf>) {
                        const ObjectNode& t = target(v.target);
                        rows.le(t.x, node.x - node.width() / 2.0);
                    }
                },
                s.value);
        }
        for (const auto& s : decl.specifiers) {
            if (const auto* w = std::get_if<dsl::WithRange>(&s.value)) {
                const Affine p = Affine::dim(new_dim(w->property, "value"));
                rows.le(p, Affine::of(w->hi));
                rows.le(Affine::of(w->lo), p);
            }
        }

        // Split rows into own / parent parts.
        std::set<std::size_t> own(node.dims.begin(), node.dims.end());
        std::set<std::size_t> parent_set;
        for (const auto& r : rows.rows) {
            bool touches_own = false;
            for (const auto& [k, v] : r.terms) {
                if (v == 0.0) continue;
                if (own.contains(k)) {
                    touches_own = true;
                } else {
                    parent_set.insert(k);
                }
            }
            if (!touches_own) {
                throw GeometryError(GeometryErrorKind::LowerDimensional,
                                    "object '" + node.name + "' has a constraint that involves none of its free axes");
            }
        }
        ParametricRegion& region = node.region;
        region.own_dims = node.dims;
        region.parent_dims.assign(parent_set.begin(), parent_set.end());
        const auto m = static_cast<Eigen::Index>(rows.rows.size());
        region.A = Eigen::MatrixXd::Zero(m, static_cast<Eigen::Index>(node.dims.size()));
        region.B = Eigen::MatrixXd::Zero(m, static_cast<Eigen::Index>(region.parent_dims.size()));
        region.c = Eigen::VectorXd::Zero(m);
        for (Eigen::Index r = 0; r < m; ++r) {
            const Affine& row = rows.rows[static_cast<std::size_t>(r)];
            region.c(r) = row.constant;
            for (const auto& [k, v] : row.terms) {
                const auto own_it = std::find(node.dims.begin(), node.dims.end(), k);
                if (own_it != node.dims.end()) {
                    region.A(r, own_it - node.dims.begin()) += v;
                } else {
                    const auto pit = std::find(region.parent_dims.begin(), region.parent_dims.end(), k);
                    region.B(r, pit - region.parent_dims.begin()) += v;
                }
            }
        }

        // Only ancestors' dimensions may parameterize the region.
        by_name[node.name] = self;
        g.nodes.push_back(node);
        for (std::size_t p : g.nodes[self].parents) g.edges.emplace_back(p, self);
        const auto anc = g.ancestors(self);
        for (std::size_t k : region.parent_dims) {
            if (!anc.contains(g.dim_owner[k])) {
                throw GeometryError(GeometryErrorKind::LowerDimensional,
                                    "object '" + node.name + "' depends on a non-ancestor dimension");
            }
        }

        if (node.dims.empty()) continue;
        all_rows.insert(all_rows.end(), rows.rows.begin(), rows.rows.end());
        geom::Polytope joint_so_far = [&] {
            try {
                return detail::rows_to_polytope(all_rows, g.free_dims.size());
            } catch (const GeometryError& e) {
                if (e.kind() == GeometryErrorKind::EmptyPolytope) {
                    throw GeometryError(GeometryErrorKind::EmptyRegion,
                                        "constraints on '" + node.name + "' cannot be satisfied");
                }
                if (e.kind() == GeometryErrorKind::Unbounded) {
                    throw GeometryError(GeometryErrorKind::UnboundedRegion,
                                        "a free axis of '" + node.name + "' lacks an upper or lower bound");
                }
                throw;
            }
        }();
        for (std::size_t k : node.dims) {
            if (joint_so_far.bounds()[k].width() <= 1e-9) {
                throw GeometryError(GeometryErrorKind::LowerDimensional,
                                    "axis " + g.free_dims[k].name() + " has zero extent");
            }
        }
        if (geom::chebyshev_center(joint_so_far).radius <= 1e-9) {
            throw GeometryError(GeometryErrorKind::LowerDimensional,
                                "region of '" + node.name + "' is not full-dimensional");
        }
    }
    return g;
}

/// All object regions stacked into one polytope over R^d.
inline JointDomain assemble_joint_domain(const SceneGraph& g) {
    if (g.dim() == 0) {
        throw GeometryError(GeometryErrorKind::NoFreeDimensions, "the scene has no free dimensions");
    }
    std::size_t total = 0;
    for (const auto& n : g.nodes) total += n.region.rows();
    const auto d = static_cast<Eigen::Index>(g.dim());
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(total), d);
    Eigen::VectorXd b(static_cast<Eigen::Index>(total));
    Eigen::Index r = 0;
    for (const auto& n : g.nodes) {
        const auto& reg = n.region;
        for (Eigen::Index i = 0; i < reg.A.rows(); ++i, ++r) {
            for (std::size_t j = 0; j < reg.own_dims.size(); ++j) {
                A(r, static_cast<Eigen::Index>(reg.own_dims[j])) += reg.A(i, static_cast<Eigen::Index>(j));
            }
            for (std::size_t j = 0; j < reg.parent_dims.size(); ++j) {
                A(r, static_cast<Eigen::Index>(reg.parent_dims[j])) += reg.B(i, static_cast<Eigen::Index>(j));
            }
            b(r) = reg.c(i);
        }
    }
    return JointDomain{geom::Polytope(A, b), g.free_dims};
}

/// Permutation of the d free dims fixing the order in which they are conditioned.
class ConditioningOrder {
public:
    ConditioningOrder() = default;

    /// Validates that `perm` is a permutation; no dependency check.
    explicit ConditioningOrder(std::vector<std::size_t> perm) : perm_(std::move(perm)) {
        std::vector<bool> seen(perm_.size(), false);
        for (std::size_t p : perm_) {
            if (p >= perm_.size() || seen[p]) {
                throw GeometryError(GeometryErrorKind::DimensionMismatch, "conditioning order is not a permutation");
            }
            seen[p] = true;
        }
    }

    /// Validates the permutation against the graph's dependency partial order.
    static ConditioningOrder checked(std::vector<std::size_t> perm, const SceneGraph& g) {
        ConditioningOrder order(std::move(perm));
        if (order.size() != g.dim()) {
            throw GeometryError(GeometryErrorKind::DimensionMismatch, "conditioning order has the wrong length");
        }
        if (!order.respects(g.dim_predecessors())) {
            throw GeometryError(GeometryErrorKind::DimensionMismatch,
                                "conditioning order places a dimension before one of its ancestors");
        }
        return order;
    }

    static ConditioningOrder identity(std::size_t d) {
        std::vector<std::size_t> p(d);
        std::iota(p.begin(), p.end(), 0);
        return ConditioningOrder(std::move(p));
    }

    bool respects(const std::vector<std::vector<std::size_t>>& pred) const {
        std::vector<std::size_t> pos(perm_.size());
        for (std::size_t i = 0; i < perm_.size(); ++i) pos[perm_[i]] = i;
        for (std::size_t k = 0; k < pred.size(); ++k) {
            for (std::size_t p : pred[k]) {
                if (pos[p] > pos[k]) return false;
            }
        }
        return true;
    }

    const std::vector<std::size_t>& perm() const { return perm_; }
    std::size_t size() const { return perm_.size(); }
    std::size_t operator[](std::size_t i) const { return perm_[i]; }

    std::string to_string() const {
        std::string s;
        for (std::size_t i = 0; i < perm_.size(); ++i) s += (i ? " " : "") + std::to_string(perm_[i]);
        return s;
    }

    friend bool operator==(const ConditioningOrder&, const ConditioningOrder&) = default;
    friend auto operator<=>(const ConditioningOrder& a, const ConditioningOrder& b) { return a.perm_ <=> b.perm_; }

private:
    std::vector<std::size_t> perm_;
};

namespace detail {

// Lexicographic enumeration of linear extensions; stops after `limit` results.
inline void enumerate_extensions(const std::vector<std::uint32_t>& pred_mask, std::size_t limit,
                                 std::vector<std::size_t>& prefix, std::uint32_t placed,
                                 std::vector<ConditioningOrder>& out) {
    const std::size_t d = pred_mask.size();
    if (out.size() >= limit) return;
    if (prefix.size() == d) {
        out.emplace_back(prefix);
        return;
    }
    for (std::size_t k = 0; k < d; ++k) {
        const std::uint32_t bit = 1u << k;
        if ((placed & bit) || (pred_mask[k] & ~placed)) continue;
        prefix.push_back(k);
        enumerate_extensions(pred_mask, limit, prefix, placed | bit, out);
        prefix.pop_back();
        if (out.size() >= limit) return;
    }
}

}  // namespace detail

/// Linear extensions of the per-dimension dependency order, sorted
/// lexicographically. Beyond `cap`, a seeded uniform sample of size `cap`
/// that always contains the identity layout.
inline std::vector<ConditioningOrder> viable_orders(const SceneGraph& g, std::size_t cap, std::uint64_t seed = 0) {
    const std::size_t d = g.dim();
    if (cap == 0) throw GeometryError(GeometryErrorKind::DimensionMismatch, "order cap must be positive");
    if (d == 0) return {};
    if (d > 20) throw GeometryError(GeometryErrorKind::DimensionMismatch, "order search supports at most 20 dims");
    const auto pred = g.dim_predecessors();
    std::vector<std::uint32_t> mask(d, 0);
    for (std::size_t k = 0; k < d; ++k) {
        for (std::size_t p : pred[k]) mask[k] |= 1u << p;
    }

    std::vector<ConditioningOrder> out;
    std::vector<std::size_t> prefix;
    detail::enumerate_extensions(mask, cap + 1, prefix, 0, out);
    if (out.size() <= cap) return out;

    // count[S] = number of ways to complete an extension whose placed set is S.
    const std::uint32_t full = (d == 32) ? ~0u : ((1u << d) - 1u);
    std::vector<double> count(std::size_t{1} << d, 0.0);
    count[full] = 1.0;
    for (std::uint32_t s = full; s-- > 0;) {
        double total = 0.0;
        for (std::size_t k = 0; k < d; ++k) {
            const std::uint32_t bit = 1u << k;
            if (!(s & bit) && !(mask[k] & ~s)) total += count[s | bit];
        }
        count[s] = total;
    }

    Rng rng(seed);
    std::set<ConditioningOrder> chosen;
    chosen.insert(ConditioningOrder::identity(d));
    while (chosen.size() < cap) {
        std::vector<std::size_t> perm;
        std::uint32_t s = 0;
        while (perm.size() < d) {
            double r = rng.uniform() * count[s];
            std::size_t pick = d;
            for (std::size_t k = 0; k < d; ++k) {
                const std::uint32_t bit = 1u << k;
                if ((s & bit) || (mask[k] & ~s)) continue;
                pick = k;
                r -= count[s | bit];
                if (r < 0.0) break;
            }
            perm.push_back(pick);
            s |= 1u << pick;
        }
        chosen.insert(ConditioningOrder(std::move(perm)));
    }
    return {chosen.begin(), chosen.end()};
}

}  // namespace unidex::scene

#endif  // UNIDEX_SCENE_MODEL_HPP
