// Dense linear-program representation and a bounded-variable two-phase
// simplex solver. Deterministic: Dantzig pricing with lowest-index tie
// breaking, falling back to Bland's rule after a run of degenerate pivots
// so cycling cannot occur. Sized for a few thousand variables; every
// optimizer in this library goes through solve_lp().

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <iomanip>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace peakreg {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Relation { LessEq, Equal, GreaterEq };
enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpOptions {
    double feas_tol = 1e-8;    // constraint / bound satisfaction
    double pivot_tol = 1e-10;  // smallest usable pivot element
    double opt_tol = 1e-9;     // reduced-cost threshold
    long max_iterations = 0;   // 0 = automatic from problem size
};

// Minimization problem: min c'x + offset subject to row relations and
// per-variable bounds (+-inf allowed). Rows are entered sparsely.
struct LinearProgram {
    struct Row {
        std::vector<std::pair<int, double>> terms;
        Relation rel = Relation::LessEq;
        double rhs = 0.0;
        int basis_hint = -1;   // variable expected to be basic here, or -1
    };

    std::vector<double> lower, upper, cost;
    std::vector<std::string> names;
    std::vector<Row> rows;
    double objective_offset = 0.0;

    int add_variable(double lo, double hi, double obj_cost, std::string name = {}) {
        lower.push_back(lo);
        upper.push_back(hi);
        cost.push_back(obj_cost);
        names.push_back(std::move(name));
        return static_cast<int>(lower.size()) - 1;
    }

    void add_constraint(std::vector<std::pair<int, double>> terms, Relation rel, double rhs,
                        int basis_hint = -1) {
        rows.push_back(Row{std::move(terms), rel, rhs, basis_hint});
    }

    std::size_t num_variables() const { return lower.size(); }

    void validate() const {
        const int n = static_cast<int>(num_variables());
        for (int j = 0; j < n; ++j) {
            if (std::isnan(lower[j]) || std::isnan(upper[j]) || !std::isfinite(cost[j]))
                throw std::invalid_argument("lp: NaN bound or non-finite cost on variable " + std::to_string(j));
            if (lower[j] > upper[j])
                throw std::invalid_argument("lp: empty bound interval on variable " + std::to_string(j));
        }
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (!std::isfinite(rows[i].rhs))
                throw std::invalid_argument("lp: non-finite rhs in row " + std::to_string(i));
            for (const auto& [j, a] : rows[i].terms) {
                if (j < 0 || j >= n)
                    throw std::invalid_argument("lp: row " + std::to_string(i) + " references variable " +
                                                std::to_string(j) + " out of range");
                if (!std::isfinite(a))
                    throw std::invalid_argument("lp: non-finite coefficient in row " + std::to_string(i));
            }
            if (rows[i].basis_hint >= n)
                throw std::invalid_argument("lp: basis hint out of range in row " + std::to_string(i));
        }
    }
};

struct LpOutcome {
    LpStatus status = LpStatus::Optimal;
    std::vector<double> solution;   // structural variables only
    double objective = 0.0;
    long iterations = 0;
    std::string message;
};

// Plain-text dump, one constraint per line, for cross-checking against an
// external solver.
inline void dump_lp(const LinearProgram& p, std::ostream& os) {
    auto var_name = [&](int j) {
        return (!p.names[j].empty()) ? p.names[j] : "x" + std::to_string(j);
    };
    os << "minimize";
    for (std::size_t j = 0; j < p.num_variables(); ++j)
        if (p.cost[j] != 0.0) os << " + " << p.cost[j] << "*" << var_name(static_cast<int>(j));
    if (p.objective_offset != 0.0) os << " + " << p.objective_offset;
    os << "\n";
    for (const auto& row : p.rows) {
        os << "  ";
        bool first = true;
        for (const auto& [j, a] : row.terms) {
            os << (first ? "" : " + ") << a << "*" << var_name(j);
            first = false;
        }
        const char* rel = row.rel == Relation::LessEq ? "<=" : row.rel == Relation::Equal ? "=" : ">=";
        os << " " << rel << " " << row.rhs << "\n";
    }
    for (std::size_t j = 0; j < p.num_variables(); ++j)
        os << "  " << p.lower[j] << " <= " << var_name(static_cast<int>(j)) << " <= " << p.upper[j] << "\n";
}

namespace detail {

// Full-tableau simplex over variables with general bounds. Column layout:
// structurals, then one slack per inequality row, then artificials added
// for rows whose crash basis starts infeasible.
class SimplexSolver {
public:
    SimplexSolver(const LinearProgram& p, const LpOptions& opt) : p_(p), opt_(opt) {}

    LpOutcome run() {
        build();
        choose_initial_basis();
        canonicalize();
        install_artificials();
        LpOutcome out;
        if (!artificial_cols_.empty()) {
            phase_ = 1;
            reset_stall_state();
            load_costs();
            const Step s = iterate();
            if (s == Step::IterationLimit) throw std::runtime_error("lp: iteration limit in phase 1");
            if (s == Step::Unbounded) throw std::runtime_error("lp: phase 1 reported unbounded");
            refresh_basic_values();
            double infeas = 0.0;
            for (int c : artificial_cols_)
                infeas += (in_row_[c] >= 0) ? std::abs(basic_val_[in_row_[c]]) : value_of(c);
            if (infeas > opt_.feas_tol * (1.0 + rhs_scale_)) {
                out.status = LpStatus::Infeasible;
                out.iterations = iters_;
                out.message = "infeasible: residual " + std::to_string(infeas) + " after phase 1";
                return out;
            }
            for (int c : artificial_cols_) lower_[c] = upper_[c] = 0.0;   // lock
            eject_basic_artificials();
        }
        phase_ = 2;
        reset_stall_state();
        load_costs();
        const Step s = iterate();
        if (s == Step::IterationLimit) throw std::runtime_error("lp: iteration limit in phase 2");
        refresh_basic_values();
        out.iterations = iters_;
        if (s == Step::Unbounded) {
            out.status = LpStatus::Unbounded;
            out.message = "unbounded: objective decreases without limit along variable " +
                          std::to_string(unbounded_var_);
            return out;
        }
        out.status = LpStatus::Optimal;
        out.solution.resize(p_.num_variables());
        for (std::size_t j = 0; j < p_.num_variables(); ++j) out.solution[j] = value_of(static_cast<int>(j));
        double obj = p_.objective_offset;
        for (std::size_t j = 0; j < p_.num_variables(); ++j) obj += p_.cost[j] * out.solution[j];
        out.objective = obj;
        return out;
    }

private:
    enum class Step { Done, Unbounded, IterationLimit };
    enum class State : unsigned char { Basic, AtLower, AtUpper, FreeZero };

    const LinearProgram& p_;
    LpOptions opt_;

    std::size_t m_ = 0;        // rows
    int n_total_ = 0;          // all columns
    std::size_t width_ = 0;    // n_total_ + 1 (rhs)
    std::vector<double> tab_;  // row-major, m_ x width_
    std::vector<double> z_;    // reduced cost row for the current phase
    std::vector<double> lower_, upper_;
    std::vector<double> cost2_;          // phase-2 costs for every column
    std::vector<State> state_;
    std::vector<int> basis_;             // per row: basic column
    std::vector<int> in_row_;            // per column: row if basic, else -1
    std::vector<double> basic_val_;
    std::vector<int> artificial_cols_;
    double rhs_scale_ = 0.0;
    long iters_ = 0;
    long max_iters_ = 0;
    int degenerate_run_ = 0;
    bool bland_ = false;
    int unbounded_var_ = -1;
    int phase_ = 2;
    bool perturbed_ = false;
    int perturb_round_ = 0;
    std::vector<double> pert_;

    double& at(std::size_t r, std::size_t c) { return tab_[r * width_ + c]; }
    double rhs(std::size_t r) const { return tab_[r * width_ + width_ - 1]; }
    double& rhs_ref(std::size_t r) { return tab_[r * width_ + width_ - 1]; }

    double value_of(int j) const {
        switch (state_[j]) {
            case State::Basic: return basic_val_[in_row_[j]];
            case State::AtLower: return lower_[j];
            case State::AtUpper: return upper_[j];
            case State::FreeZero: return 0.0;
        }
        return 0.0;
    }

    void build() {
        p_.validate();
        const int n = static_cast<int>(p_.num_variables());
        m_ = p_.rows.size();
        int n_slack = 0;
        for (const auto& row : p_.rows)
            if (row.rel != Relation::Equal) ++n_slack;
        n_total_ = n + n_slack;
        width_ = static_cast<std::size_t>(n_total_) + 1;
        tab_.assign(m_ * width_, 0.0);
        lower_.assign(n_total_, 0.0);
        upper_.assign(n_total_, kInf);
        cost2_.assign(n_total_, 0.0);
        for (int j = 0; j < n; ++j) {
            lower_[j] = p_.lower[j];
            upper_[j] = p_.upper[j];
            cost2_[j] = p_.cost[j];
        }
        slack_of_.assign(m_, -1);
        int next_slack = n;
        for (std::size_t i = 0; i < m_; ++i) {
            const auto& row = p_.rows[i];
            for (const auto& [j, a] : row.terms) at(i, static_cast<std::size_t>(j)) += a;
            // a.x + s = rhs with s >= 0 for <=, s <= 0 encoded as -s for >=
            if (row.rel != Relation::Equal) {
                slack_of_[i] = next_slack;
                at(i, static_cast<std::size_t>(next_slack)) = (row.rel == Relation::LessEq) ? 1.0 : -1.0;
                ++next_slack;
            }
            rhs_ref(i) = row.rhs;
            rhs_scale_ = std::max(rhs_scale_, std::abs(row.rhs));
        }
        state_.assign(n_total_, State::AtLower);
        for (int j = 0; j < n_total_; ++j) {
            if (std::isfinite(lower_[j])) state_[j] = State::AtLower;
            else if (std::isfinite(upper_[j])) state_[j] = State::AtUpper;
            else state_[j] = State::FreeZero;
        }
        in_row_.assign(n_total_, -1);
        basis_.assign(m_, -1);
        basic_val_.assign(m_, 0.0);
        max_iters_ = opt_.max_iterations > 0
                         ? opt_.max_iterations
                         : 2000 + 200 * static_cast<long>(m_ + static_cast<std::size_t>(n_total_));
    }

    // Crash: per row prefer the builder's hint, then the slack, then any
    // structural singleton column. Rows left without a basic variable get
    // an artificial later.
    void choose_initial_basis() {
        const int n = static_cast<int>(p_.num_variables());
        std::vector<int> support_count(n, 0);
        std::vector<int> support_row(n, -1);
        for (std::size_t i = 0; i < m_; ++i)
            for (const auto& [j, a] : p_.rows[i].terms)
                if (a != 0.0) {
                    ++support_count[j];
                    support_row[j] = static_cast<int>(i);
                }
        for (std::size_t i = 0; i < m_; ++i) {
            const int hint = p_.rows[i].basis_hint;
            // a zero-span (fixed) basic variable would pin every later ratio
            // test at zero, so fixed columns never make the crash basis
            if (hint >= 0 && in_row_[hint] < 0 && !fixed(hint) &&
                std::abs(at(i, hint)) > opt_.pivot_tol) {
                assign_basis(static_cast<int>(i), hint);
                continue;
            }
            if (slack_of_[i] >= 0) {
                assign_basis(static_cast<int>(i), slack_of_[i]);
                continue;
            }
            for (int j = 0; j < n; ++j) {
                if (support_count[j] == 1 && support_row[j] == static_cast<int>(i) && in_row_[j] < 0 &&
                    !fixed(j) && std::abs(at(i, j)) > opt_.pivot_tol) {
                    assign_basis(static_cast<int>(i), j);
                    break;
                }
            }
        }
    }

    void assign_basis(int row, int col) {
        basis_[row] = col;
        in_row_[col] = row;
        state_[col] = State::Basic;
    }

    // Gaussian elimination turning every chosen basis column into a unit
    // column. Hints that turn out singular are demoted to artificials.
    void canonicalize() {
        for (std::size_t i = 0; i < m_; ++i) {
            int bv = basis_[i];
            if (bv < 0) continue;
            const double piv = at(i, bv);
            if (std::abs(piv) <= opt_.pivot_tol) {
                state_[bv] = std::isfinite(lower_[bv]) ? State::AtLower
                             : std::isfinite(upper_[bv]) ? State::AtUpper
                                                         : State::FreeZero;
                in_row_[bv] = -1;
                basis_[i] = -1;
                continue;
            }
            if (piv != 1.0) {
                const double inv = 1.0 / piv;
                double* r = &tab_[i * width_];
                for (std::size_t c = 0; c < width_; ++c) r[c] *= inv;
            }
            for (std::size_t r2 = 0; r2 < m_; ++r2) {
                if (r2 == i) continue;
                const double f = at(r2, bv);
                if (f == 0.0) continue;
                eliminate_row(r2, i, f);
                at(r2, bv) = 0.0;
            }
        }
    }

    void eliminate_row(std::size_t target, std::size_t source, double factor) {
        double* t = &tab_[target * width_];
        const double* s = &tab_[source * width_];
        for (std::size_t c = 0; c < width_; ++c) t[c] -= factor * s[c];
    }

    // Basic values from the canonical tableau and the nonbasic bound values,
    // then artificials (+1 unit columns) for rows that start out of bounds.
    void install_artificials() {
        compute_basic_values();
        std::vector<int> bad_rows;
        for (std::size_t i = 0; i < m_; ++i) {
            if (basis_[i] < 0) {
                bad_rows.push_back(static_cast<int>(i));
                continue;
            }
            const int bv = basis_[i];
            if (basic_val_[i] < lower_[bv] - opt_.feas_tol || basic_val_[i] > upper_[bv] + opt_.feas_tol)
                bad_rows.push_back(static_cast<int>(i));
        }
        if (bad_rows.empty()) return;
        const int first_art = n_total_;
        grow_columns(static_cast<int>(bad_rows.size()));
        int art = first_art;
        for (int i : bad_rows) {
            double residual = basic_val_[i];
            if (basis_[i] >= 0) {
                // park the old basic variable at the bound it violated
                const int old = basis_[i];
                const double bound = residual > upper_[old] ? upper_[old] : lower_[old];
                state_[old] = (bound == upper_[old] && std::isfinite(upper_[old])) ? State::AtUpper : State::AtLower;
                in_row_[old] = -1;
                residual -= bound;
            }
            if (residual < 0.0) flip_row_sign(static_cast<std::size_t>(i)), residual = -residual;
            at(static_cast<std::size_t>(i), static_cast<std::size_t>(art)) = 1.0;
            lower_[art] = 0.0;
            upper_[art] = kInf;
            assign_basis(i, art);
            basic_val_[i] = residual;
            artificial_cols_.push_back(art);
            ++art;
        }
    }

    void grow_columns(int extra) {
        const std::size_t new_width = width_ + static_cast<std::size_t>(extra);
        std::vector<double> wider(m_ * new_width, 0.0);
        for (std::size_t i = 0; i < m_; ++i) {
            double* dst = &wider[i * new_width];
            const double* src = &tab_[i * width_];
            std::copy(src, src + width_ - 1, dst);
            dst[new_width - 1] = src[width_ - 1];
        }
        tab_.swap(wider);
        n_total_ += extra;
        width_ = new_width;
        lower_.resize(n_total_, 0.0);
        upper_.resize(n_total_, kInf);
        cost2_.resize(n_total_, 0.0);
        state_.resize(n_total_, State::AtLower);
        in_row_.resize(n_total_, -1);
    }

    void flip_row_sign(std::size_t i) {
        double* r = &tab_[i * width_];
        for (std::size_t c = 0; c < width_; ++c) r[c] = -r[c];
    }

    void compute_basic_values() {
        for (std::size_t i = 0; i < m_; ++i) basic_val_[i] = rhs(i);
        for (int j = 0; j < n_total_; ++j) {
            if (state_[j] == State::Basic || state_[j] == State::FreeZero) continue;
            const double xj = (state_[j] == State::AtLower) ? lower_[j] : upper_[j];
            if (xj == 0.0) continue;
            for (std::size_t i = 0; i < m_; ++i) {
                const double a = at(i, static_cast<std::size_t>(j));
                if (a != 0.0) basic_val_[i] -= a * xj;
            }
        }
    }

    void refresh_basic_values() { compute_basic_values(); }

    void load_phase1_costs() {
        z_.assign(width_, 0.0);
        for (int c : artificial_cols_) z_[c] = 1.0;
        if (perturbed_)
            for (int j = 0; j < n_total_; ++j) z_[j] += pert_[j];
        for (std::size_t i = 0; i < m_; ++i) {
            const int bv = basis_[i];
            if (bv >= 0 && z_[bv] != 0.0) {
                const double cb = z_[bv];
                const double* r = &tab_[i * width_];
                for (std::size_t c = 0; c < width_; ++c) z_[c] -= cb * r[c];
            }
        }
        for (std::size_t i = 0; i < m_; ++i)
            if (basis_[i] >= 0) z_[basis_[i]] = 0.0;
    }

    void load_phase2_costs() {
        z_.assign(width_, 0.0);
        for (int j = 0; j < n_total_; ++j) z_[j] = cost2_[j];
        if (perturbed_)
            for (int j = 0; j < n_total_; ++j) z_[j] += pert_[j];
        for (std::size_t i = 0; i < m_; ++i) {
            const int bv = basis_[i];
            const double cb = (bv >= 0) ? z_[bv] : 0.0;
            if (cb != 0.0) {
                const double* r = &tab_[i * width_];
                for (std::size_t c = 0; c < width_; ++c) z_[c] -= cb * r[c];
            }
        }
        for (std::size_t i = 0; i < m_; ++i)
            if (basis_[i] >= 0) z_[basis_[i]] = 0.0;
    }

    void load_costs() {
        if (phase_ == 1) load_phase1_costs();
        else load_phase2_costs();
    }

    void reset_stall_state() {
        bland_ = false;
        degenerate_run_ = 0;
        perturbed_ = false;
        perturb_round_ = 0;
    }

    // Pivot any artificial that survived phase 1 out of the basis.  The
    // artificials are locked to zero at this point, so a degenerate pivot on
    // any structural/slack column with a usable coefficient removes them
    // without moving the solution.  A row with no such column is redundant
    // and can safely keep its artificial: the ratio test skips ~0 entries.
    void eject_basic_artificials() {
        if (artificial_cols_.empty()) return;
        const int limit = artificial_cols_.front();
        for (int c : artificial_cols_) {
            const int row = in_row_[c];
            if (row < 0) continue;
            int best = -1;
            double best_mag = opt_.pivot_tol;
            for (int j = 0; j < limit; ++j) {
                if (state_[j] == State::Basic || fixed(j)) continue;
                const double mag = std::abs(at(static_cast<std::size_t>(row), static_cast<std::size_t>(j)));
                if (mag > best_mag) {
                    best_mag = mag;
                    best = j;
                }
            }
            if (best >= 0) pivot(best, 1, 0.0, static_cast<std::size_t>(row), false);
        }
    }

    static double unit_noise(std::uint64_t x) {
        x += 0x9E3779B97F4A7C15ull;
        x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
        x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
        x ^= x >> 31;
        return static_cast<double>(x >> 11) * 0x1.0p-53;
    }

    // Deterministic tiny cost perturbation: breaks degenerate-cycle ties while
    // keeping rerun and cross-thread results bit-identical for a given model.
    void apply_perturbation() {
        pert_.assign(static_cast<std::size_t>(n_total_), 0.0);
        const std::uint64_t salt = 0x5DEECE66Dull * static_cast<std::uint64_t>(perturb_round_ + 1);
        for (int j = 0; j < n_total_; ++j) {
            if (fixed(j)) continue;
            const double base = (phase_ == 1) ? 1.0 : std::abs(cost2_[j]);
            pert_[j] = 1e-9 * (1.0 + base) * (0.5 + unit_noise(salt + static_cast<std::uint64_t>(j)));
        }
        perturbed_ = true;
        ++perturb_round_;
        load_costs();
    }

    bool fixed(int j) const { return lower_[j] == upper_[j]; }

    // Entering column and its direction: +1 to increase, -1 to decrease.
    std::pair<int, int> price() const {
        int best = -1, best_dir = 0;
        double best_score = opt_.opt_tol;
        for (int j = 0; j < n_total_; ++j) {
            if (state_[j] == State::Basic || fixed(j)) continue;
            const double d = z_[j];
            int dir = 0;
            if ((state_[j] == State::AtLower || state_[j] == State::FreeZero) && d < -opt_.opt_tol) dir = 1;
            else if ((state_[j] == State::AtUpper || state_[j] == State::FreeZero) && d > opt_.opt_tol) dir = -1;
            if (dir == 0) continue;
            if (bland_) return {j, dir};
            if (std::abs(d) > best_score) {
                best_score = std::abs(d);
                best = j;
                best_dir = dir;
            }
        }
        return {best, best_dir};
    }

    Step iterate() {
        long refresh_countdown = 256;
        long reload_countdown = 512;
        while (true) {
            if (iters_ >= max_iters_) return Step::IterationLimit;
            if (degenerate_run_ >= 48) {
                // stalled on a degenerate vertex: perturb costs to break the
                // tie structure; fall back to Bland once rounds are exhausted
                if (perturb_round_ < 4) {
                    apply_perturbation();
                    degenerate_run_ = 0;
                    bland_ = false;
                } else {
                    bland_ = true;
                }
            }
            const auto [enter, dir] = price();
            if (enter < 0) {
                if (perturbed_) {
                    // optimal for the perturbed costs: drop the noise and
                    // keep iterating on the true objective
                    perturbed_ = false;
                    load_costs();
                    continue;
                }
                return Step::Done;
            }
            ++iters_;
            if (--refresh_countdown <= 0) {
                refresh_basic_values();
                refresh_countdown = 256;
            }
            if (--reload_countdown <= 0) {
                load_costs();
                reload_countdown = 512;
            }

            // ratio test
            double theta = kInf;
            int leave_row = -1;
            bool leave_at_upper = false;
            double own_span = kInf;
            if (std::isfinite(lower_[enter]) && std::isfinite(upper_[enter]))
                own_span = upper_[enter] - lower_[enter];
            theta = own_span;
            for (std::size_t i = 0; i < m_; ++i) {
                const double a = at(i, static_cast<std::size_t>(enter));
                if (std::abs(a) <= opt_.pivot_tol) continue;
                const int bv = basis_[i];
                const double rate = -dir * a;   // d(basic value)/d(theta)
                double limit;
                bool hits_upper;
                if (rate > 0.0) {
                    if (!std::isfinite(upper_[bv])) continue;
                    limit = (upper_[bv] - basic_val_[i]) / rate;
                    hits_upper = true;
                } else {
                    if (!std::isfinite(lower_[bv])) continue;
                    limit = (basic_val_[i] - lower_[bv]) / (-rate);
                    hits_upper = false;
                }
                if (limit < 0.0) limit = 0.0;
                if (limit < theta - 1e-12) {
                    theta = limit;
                    leave_row = static_cast<int>(i);
                    leave_at_upper = hits_upper;
                } else if (leave_row >= 0 && limit <= theta + 1e-12) {
                    // tie: prefer the numerically larger pivot, then lowest index
                    const double cur = std::abs(at(static_cast<std::size_t>(leave_row),
                                                   static_cast<std::size_t>(enter)));
                    if (bland_) {
                        if (bv < basis_[leave_row]) { leave_row = static_cast<int>(i); leave_at_upper = hits_upper; }
                    } else if (std::abs(a) > cur * 2.0) {
                        leave_row = static_cast<int>(i);
                        leave_at_upper = hits_upper;
                    }
                }
            }
            if (!std::isfinite(theta)) {
                unbounded_var_ = enter;
                return Step::Unbounded;
            }

            if (theta <= 1e-11) ++degenerate_run_;
            else { degenerate_run_ = 0; bland_ = false; }

            if (leave_row < 0 || (own_span <= theta && std::isfinite(own_span))) {
                bound_flip(enter, dir, own_span);
                continue;
            }
            pivot(enter, dir, theta, static_cast<std::size_t>(leave_row), leave_at_upper);
        }
    }

    void bound_flip(int enter, int dir, double span) {
        const double delta = dir * span;
        if (delta != 0.0)
            for (std::size_t i = 0; i < m_; ++i) {
                const double a = at(i, static_cast<std::size_t>(enter));
                if (a != 0.0) basic_val_[i] -= a * delta;
            }
        state_[enter] = (state_[enter] == State::AtLower) ? State::AtUpper : State::AtLower;
    }

    void pivot(int enter, int dir, double theta, std::size_t pr, bool leave_at_upper) {
        const double enter_start = value_of(enter);
        if (theta != 0.0)
            for (std::size_t i = 0; i < m_; ++i) {
                if (i == pr) continue;
                const double a = at(i, static_cast<std::size_t>(enter));
                if (a != 0.0) basic_val_[i] -= dir * theta * a;
            }
        const int leave = basis_[pr];
        state_[leave] = leave_at_upper ? State::AtUpper : State::AtLower;
        if (!std::isfinite(upper_[leave]) && leave_at_upper) state_[leave] = State::FreeZero;
        if (!std::isfinite(lower_[leave]) && !leave_at_upper) state_[leave] = State::FreeZero;
        in_row_[leave] = -1;

        const double piv = at(pr, static_cast<std::size_t>(enter));
        double* prow = &tab_[pr * width_];
        if (piv != 1.0) {
            const double inv = 1.0 / piv;
            for (std::size_t c = 0; c < width_; ++c) prow[c] *= inv;
        }
        for (std::size_t r = 0; r < m_; ++r) {
            if (r == pr) continue;
            const double f = at(r, static_cast<std::size_t>(enter));
            if (f == 0.0) continue;
            eliminate_row(r, pr, f);
            at(r, static_cast<std::size_t>(enter)) = 0.0;
        }
        const double zf = z_[enter];
        if (zf != 0.0) {
            for (std::size_t c = 0; c < width_; ++c) z_[c] -= zf * prow[c];
            z_[enter] = 0.0;
        }
        assign_basis(static_cast<int>(pr), enter);
        basic_val_[pr] = enter_start + dir * theta;
    }

    std::vector<int> slack_of_;
};

} // namespace detail

inline LpOutcome solve_lp(const LinearProgram& p, const LpOptions& opt = {}) {
    detail::SimplexSolver solver(p, opt);
    return solver.run();
}

} // namespace peakreg
