#pragma once

#include <complex>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "qg/graph.hpp"

namespace qg {

using Complex = std::complex<double>;

/// Point on the E-torus; coordinates stored in [0, 2pi).
class TorusPoint {
public:
    TorusPoint() = default;
    explicit TorusPoint(Eigen::VectorXd coords);
    explicit TorusPoint(const std::vector<double>& coords);

    /// The linear flow k -> k*l mod 2pi.
    static TorusPoint flow(const Eigen::VectorXd& lengths, double k);

    int size() const { return static_cast<int>(x_.size()); }
    double operator[](int i) const { return x_[i]; }
    const Eigen::VectorXd& coords() const { return x_; }

    TorusPoint inverted() const;                    // -x mod 2pi
    TorusPoint shifted(int coord, double delta) const;

private:
    Eigen::VectorXd x_;
};

/// Magnetic flux vector, one coordinate per cut edge.
class FluxVector {
public:
    FluxVector() = default;
    explicit FluxVector(Eigen::VectorXd alpha);
    static FluxVector zero(int beta) { return FluxVector(Eigen::VectorXd::Zero(beta)); }

    int size() const { return static_cast<int>(a_.size()); }
    double operator[](int i) const { return a_[i]; }
    const Eigen::VectorXd& coords() const { return a_; }
    FluxVector shifted(int coord, double delta) const;
    FluxVector negated() const;

private:
    Eigen::VectorXd a_;
};

/// Directed-bond frame shared by the secular function and the lead
/// scattering machinery.  Labels are ordered: M lead labels first (each its
/// own reversal, rooted at its attachment vertex), then the 2E graph bonds
/// as (e_0 forward, e_0 reversed, e_1 forward, ...), the forward label
/// running from the stored u endpoint toward v.
struct BondFrame {
    int leads = 0;
    std::vector<int> origin;    // per label
    std::vector<int> terminus;  // per label
    std::vector<int> reversal;  // per label
    std::vector<int> degree;    // per vertex, leads included
    Eigen::MatrixXd S;          // full scattering matrix over all labels

    int labels() const { return static_cast<int>(origin.size()); }
};

/// Vertex-condition scattering entries: backscatter 2/deg(v) - 1 (or -1 at
/// a Dirichlet leaf), transmission 2/deg(v) between distinct labels through
/// the same vertex.
BondFrame make_bond_frame(int vertex_count,
                          const std::vector<std::pair<int, int>>& edge_endpoints,
                          const std::vector<VertexCondition>& conditions,
                          const std::vector<int>& lead_vertices = {});

/// The 2E x 2E real orthogonal bond-scattering matrix of a graph.
Eigen::MatrixXd bond_scattering_matrix(const MetricGraph& g);

struct SecularValue {
    Complex F = 0.0;  // det(Id - e^{ia} e^{ix} S)
    double FR = 0.0;  // calibrated real rescaling, same zero set
};

struct NullSpaceInfo {
    Eigen::VectorXd singular_values; // descending
    int multiplicity = 0;            // count below rel_tol * largest
    Eigen::VectorXcd vector;         // right singular vector of the smallest value
};

struct FdReport {
    double grad_residual = 0.0;
    double hess_residual = 0.0;
};

/// Evaluator of the secular function F(x; a) = det(Id - e^{ia} e^{ix} S)
/// and of its real rescaling F_R, with exact first and second derivatives
/// in the torus and flux variables.
///
/// F_R is obtained from e^{-i(x_1+...+x_E)} F / sqrt(det S); the square
/// root uses 1 for det S = 1 and the principal value i for det S = -1, and
/// one global sign per graph is fixed by requiring F_R > 0 at the first
/// coarse-grid probe where |F_R| > 1e-3.  Realness is asserted on every
/// evaluation.
///
/// Derivatives are exact, not numeric: per flux variable F_R is a
/// trigonometric polynomial of degree 1 (sampled at 0, +-pi/2) and per
/// torus variable of degree at most 2 (sampled at 5 equispaced phases);
/// the interpolant is differentiated analytically.
class SecularContext {
public:
    explicit SecularContext(MetricGraph g);
    SecularContext(MetricGraph g, CutSet cut);

    const MetricGraph& graph() const { return graph_; }
    const CutSet& cut() const { return cut_; }
    int beta() const { return cut_.size(); }
    int bond_count() const { return 2 * graph_.edge_count(); }
    const Eigen::MatrixXd& bond_matrix() const { return frame_.S; }
    int sign_calibration() const { return sign_; }
    Eigen::VectorXd lengths() const;

    /// Id - e^{ia} e^{ix} S.
    Eigen::MatrixXcd secular_matrix(const TorusPoint& x, const FluxVector& a) const;

    /// The unitary e^{ix} S at a = 0.  Along the flow its eigenphases move
    /// forward with speed between the shortest and longest edge length;
    /// crossings through phase 0 are exactly the eigenvalues.
    Eigen::MatrixXcd flow_unitary(const TorusPoint& x) const;

    Complex F(const TorusPoint& x, const FluxVector& a) const;
    double FR(const TorusPoint& x, const FluxVector& a) const;
    double FR0(const TorusPoint& x) const;  // a = 0
    SecularValue eval(const TorusPoint& x, const FluxVector& a) const;

    /// |Im| of the rescaled secular value relative to its magnitude,
    /// before the realness projection.
    double realness_residual(const TorusPoint& x, const FluxVector& a) const;

    /// Singular structure of Id - e^{ix} S at a = 0.
    NullSpaceInfo null_space(const TorusPoint& x, double rel_tol = 1e-8) const;

    /// d F_R / d x at a = 0.
    Eigen::VectorXd gradient_x(const TorusPoint& x) const;
    /// Flux Hessian of F_R at a = 0, symmetrized.
    Eigen::MatrixXd hessian_alpha(const TorusPoint& x) const;

    /// Same quantities through the complex function F (crosscheck route).
    Eigen::VectorXcd gradient_x_complex(const TorusPoint& x) const;
    Eigen::MatrixXcd hessian_alpha_complex(const TorusPoint& x) const;

    /// Max relative deviation between the interpolation-exact derivatives
    /// and central finite differences with step h.
    FdReport fd_crosscheck(const TorusPoint& x, double h = 1e-4) const;

private:
    void init();
    double FR_raw(const TorusPoint& x, const FluxVector& a) const;

    MetricGraph graph_;
    CutSet cut_;
    BondFrame frame_;
    std::vector<double> flux_sign_;  // per bond: +-1 on cut-edge labels, 0 otherwise
    Complex sqrt_det_s_ = 1.0;
    int sign_ = 1;
};

} // namespace qg
