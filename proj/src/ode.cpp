#include "calcium/ode.hpp"

#include <algorithm>
#include <cmath>

namespace calcium::ode {

namespace {

constexpr double kMachEps = std::numeric_limits<double>::epsilon();

double rms_norm(const Vec& v, const Vec& scale) { return std::sqrt((v.array() / scale.array()).square().mean()); }

Vec error_scale(const Vec& a, const Vec& b, const IntegratorConfig& cfg)
{
    return (cfg.abs_tol + cfg.rel_tol * a.cwiseAbs().cwiseMax(b.cwiseAbs()).array()).matrix();
}

struct Counter {
    const Field& f;
    long& n;
    void operator()(double t, const Vec& y, Vec& dy) const
    {
        ++n;
        f(t, y, dy);
    }
};

double initial_step(const Counter& f, double t0, const Vec& y0, const Vec& f0, int order, double span,
                    const IntegratorConfig& cfg)
{
    const Vec scale = (cfg.abs_tol + cfg.rel_tol * y0.cwiseAbs().array()).matrix();
    const double d0 = rms_norm(y0, scale), d1 = rms_norm(f0, scale);
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h0 = std::min(h0, span);
    Vec y1 = y0 + h0 * f0, f1(y0.size());
    f(t0 + h0, y1, f1);
    const double d2 = rms_norm(f1 - f0, scale) / h0;
    const double dm = std::max(d1, d2);
    const double h1 = dm <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dm, 1.0 / (order + 1));
    return std::min({100.0 * h0, h1, span, cfg.max_step});
}

// ---------------------------------------------------------------------------
// Radau IIA (3 stages, order 5)

struct RadauTableau {
    double c[3];
    double A[3][3];
    double E[3];
    double mu_real;
    Eigen::Matrix3d Vinv;  // maps stage increments to monomial coefficients in theta

    RadauTableau()
    {
        const double s6 = std::sqrt(6.0);
        c[0] = (4.0 - s6) / 10.0;
        c[1] = (4.0 + s6) / 10.0;
        c[2] = 1.0;
        const double a[3][3] = {{(88.0 - 7.0 * s6) / 360.0, (296.0 - 169.0 * s6) / 1800.0, (-2.0 + 3.0 * s6) / 225.0},
                                {(296.0 + 169.0 * s6) / 1800.0, (88.0 + 7.0 * s6) / 360.0, (-2.0 - 3.0 * s6) / 225.0},
                                {(16.0 - s6) / 36.0, (16.0 + s6) / 36.0, 1.0 / 9.0}};
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) A[i][j] = a[i][j];
        E[0] = (-13.0 - 7.0 * s6) / 3.0;
        E[1] = (-13.0 + 7.0 * s6) / 3.0;
        E[2] = -1.0 / 3.0;
        mu_real = 3.0 + std::cbrt(9.0) - std::cbrt(3.0);
        Eigen::Matrix3d V;
        for (int i = 0; i < 3; ++i)
            for (int k = 0; k < 3; ++k) V(i, k) = std::pow(c[i], k + 1);
        Vinv = V.inverse();
    }
};

const RadauTableau& radau() {
    static const RadauTableau tab;
    return tab;
}

constexpr int kNewtonMaxIter = 6;

class RadauStepper {
public:
    RadauStepper(const Counter& f, const IntegratorConfig& cfg, int n) : f_(f), cfg_(cfg), n_(n)
    {
        newton_tol_ = std::max(10.0 * kMachEps / cfg.rel_tol, std::min(0.03, std::sqrt(cfg.rel_tol)));
    }

    struct Result {
        bool accepted = false;
        bool newton_failed = false;
        double h_next = 0.0;
        Vec y_new;
        Vec f_new;
        Trajectory::Segment seg;
    };

    void set_jacobian(double t, const Vec& y)
    {
        const Field g = [this](double tt, const Vec& yy, Vec& dy) { f_(tt, yy, dy); };
        J_ = fd_jacobian(g, t, y);
        jac_current_ = true;
    }

    bool jac_current() const { return jac_current_; }

    Result attempt(double t, const Vec& y, const Vec& fy, double h, const Trajectory::Segment* prev)
    {
        const RadauTableau& T = radau();
        const int n = n_;
        Result r;
        Mat M = Mat::Identity(3 * n, 3 * n);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) M.block(i * n, j * n, n, n) -= h * T.A[i][j] * J_;
        const Eigen::PartialPivLU<Mat> lu(M);

        Vec Z = Vec::Zero(3 * n);
        if (prev) {
            for (int i = 0; i < 3; ++i) Z.segment(i * n, n) = Trajectory::eval_segment(*prev, t + T.c[i] * h) - y;
        }
        const Vec scale = (cfg_.abs_tol + cfg_.rel_tol * y.cwiseAbs().array()).matrix();

        Vec F(3 * n), fi(n), G(3 * n);
        double dw_old = -1.0, rate = -1.0;
        bool converged = false;
        int iter = 0;
        for (; iter < kNewtonMaxIter; ++iter) {
            for (int i = 0; i < 3; ++i) {
                f_(t + T.c[i] * h, y + Z.segment(i * n, n), fi);
                F.segment(i * n, n) = fi;
            }
            if (!F.allFinite()) break;
            for (int i = 0; i < 3; ++i) {
                Vec acc = Z.segment(i * n, n);
                for (int j = 0; j < 3; ++j) acc -= h * T.A[i][j] * F.segment(j * n, n);
                G.segment(i * n, n) = acc;
            }
            const Vec dZ = -lu.solve(G);
            double dw = 0.0;
            for (int i = 0; i < 3; ++i) dw += std::pow(rms_norm(dZ.segment(i * n, n), scale), 2);
            dw = std::sqrt(dw / 3.0);
            if (dw_old > 0.0) rate = dw / dw_old;
            if (rate >= 0.0 && (rate >= 1.0 || std::pow(rate, kNewtonMaxIter - iter) / (1.0 - rate) * dw > newton_tol_))
                break;
            Z += dZ;
            if (dw == 0.0 || (rate >= 0.0 && rate / (1.0 - rate) * dw < newton_tol_)) {
                converged = true;
                ++iter;
                break;
            }
            dw_old = dw;
        }
        if (!converged) {
            r.newton_failed = true;
            r.h_next = 0.5 * h;
            return r;
        }
        last_rate_ = rate;

        const Vec y_new = y + Z.segment(2 * n, n);
        Vec ZE = Vec::Zero(n);
        for (int i = 0; i < 3; ++i) ZE += T.E[i] * Z.segment(i * n, n);
        ZE /= h;
        const Mat Mr = T.mu_real / h * Mat::Identity(n, n) - J_;
        const Eigen::PartialPivLU<Mat> lur(Mr);
        Vec err = lur.solve(fy + ZE);
        const Vec sc = error_scale(y, y_new, cfg_);
        double en = rms_norm(err, sc);
        if (en > 1.0 && rejected_last_) {
            Vec fe(n);
            f_(t, y + err, fe);
            err = lur.solve(fe + ZE);
            en = rms_norm(err, sc);
        }
        const double safety = 0.9 * (2 * kNewtonMaxIter + 1) / (2 * kNewtonMaxIter + iter);
        if (en > 1.0) {
            r.h_next = h * std::max(0.2, safety * std::pow(en, -0.25));
            rejected_last_ = true;
            return r;
        }
        double mult = 1.0;
        if (h_old_ > 0.0 && en_old_ > 0.0 && en > 0.0) mult = h / h_old_ * std::pow(en_old_ / en, 0.25);
        const double factor = en == 0.0 ? 10.0 : std::min(10.0, safety * std::min(1.0, mult) * std::pow(en, -0.25));
        h_old_ = h;
        en_old_ = std::max(en, 1e-10);
        rejected_last_ = false;

        r.accepted = true;
        r.h_next = h * factor;
        r.y_new = y_new;
        r.f_new.resize(n);
        f_(t + h, y_new, r.f_new);
        r.seg.t0 = t;
        r.seg.h = h;
        r.seg.kind = 0;
        r.seg.coef.resize(n, 4);
        r.seg.coef.col(0) = y;
        for (int k = 0; k < 3; ++k) {
            Vec a = Vec::Zero(n);
            for (int i = 0; i < 3; ++i) a += T.Vinv(k, i) * Z.segment(i * n, n);
            r.seg.coef.col(k + 1) = a;
        }
        jac_current_ = false;
        return r;
    }

    bool wants_new_jacobian() const { return last_rate_ > 1e-3; }

private:
    const Counter& f_;
    const IntegratorConfig& cfg_;
    int n_;
    Mat J_;
    bool jac_current_ = false;
    double newton_tol_;
    double last_rate_ = 1.0;
    double h_old_ = -1.0;
    double en_old_ = -1.0;
    bool rejected_last_ = false;
};

// ---------------------------------------------------------------------------
// Dormand-Prince 5(4)

class DopriStepper {
public:
    DopriStepper(const Counter& f, const IntegratorConfig& cfg, int n) : f_(f), cfg_(cfg), n_(n) {}

    struct Result {
        bool accepted = false;
        double h_next = 0.0;
        Vec y_new;
        Vec f_new;
        Trajectory::Segment seg;
    };

    Result attempt(double t, const Vec& y, const Vec& k1, double h)
    {
        static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
        static constexpr double a21 = 1.0 / 5;
        static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
        static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
        static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
        static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                                a65 = -5103.0 / 18656;
        static constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                                a76 = 11.0 / 84;
        static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                                e6 = 22.0 / 525, e7 = -1.0 / 40;
        static constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                                d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                                d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;
        const int n = n_;
        Vec k2(n), k3(n), k4(n), k5(n), k6(n), k7(n);
        f_(t + c2 * h, y + h * a21 * k1, k2);
        f_(t + c3 * h, y + h * (a31 * k1 + a32 * k2), k3);
        f_(t + c4 * h, y + h * (a41 * k1 + a42 * k2 + a43 * k3), k4);
        f_(t + c5 * h, y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4), k5);
        f_(t + h, y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5), k6);
        const Vec y_new = y + h * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
        f_(t + h, y_new, k7);
        const Vec err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
        const double en = rms_norm(err, error_scale(y, y_new, cfg_));
        Result r;
        if (!(en <= 1.0)) {
            r.h_next = h * (std::isfinite(en) ? std::max(0.2, 0.9 * std::pow(en, -0.2)) : 0.2);
            return r;
        }
        r.accepted = true;
        r.h_next = h * (en == 0.0 ? 10.0 : std::min(10.0, std::max(0.2, 0.9 * std::pow(en, -0.2))));
        r.y_new = y_new;
        r.f_new = k7;
        r.seg.t0 = t;
        r.seg.h = h;
        r.seg.kind = 1;
        r.seg.coef.resize(n, 5);
        const Vec ydiff = y_new - y;
        const Vec bspl = h * k1 - ydiff;
        r.seg.coef.col(0) = y;
        r.seg.coef.col(1) = ydiff;
        r.seg.coef.col(2) = bspl;
        r.seg.coef.col(3) = ydiff - h * k7 - bspl;
        r.seg.coef.col(4) = h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
        return r;
    }

private:
    const Counter& f_;
    const IntegratorConfig& cfg_;
    int n_;
};

// Root of section(segment(t)) in [seg.t0, seg.t0 + h] by the Illinois variant of regula falsi.
double refine_crossing(const Trajectory::Segment& seg, const Section& s, double g0, double g1)
{
    double a = seg.t0, b = seg.t0 + seg.h;
    double ga = g0, gb = g1;
    int side = 0;
    double tm = b;
    for (int it = 0; it < 200; ++it) {
        tm = (a * gb - b * ga) / (gb - ga);
        if (!(tm > a && tm < b)) tm = 0.5 * (a + b);
        const double gm = s(Trajectory::eval_segment(seg, tm));
        if (std::abs(gm) < kEventTol || (b - a) <= 4.0 * kMachEps * std::max(1.0, std::abs(tm))) return tm;
        if ((gm > 0) == (gb > 0)) {
            b = tm;
            gb = gm;
            if (side == -1) ga *= 0.5;
            side = -1;
        } else {
            a = tm;
            ga = gm;
            if (side == +1) gb *= 0.5;
            side = +1;
        }
    }
    return tm;
}

}  // namespace

void IntegratorConfig::validate() const
{
    if (!(abs_tol > 0.0 && abs_tol <= rel_tol && rel_tol < 1.0))
        throw std::invalid_argument("integrator tolerances need 0 < abs_tol <= rel_tol < 1");
    if (!(min_step < max_step)) throw std::invalid_argument("integrator needs min_step < max_step");
    if (max_steps <= 0) throw std::invalid_argument("integrator needs max_steps > 0");
}

const char* to_string(Termination t)
{
    switch (t) {
    case Termination::Time: return "time";
    case Termination::Event: return "event";
    case Termination::Failure: return "failure";
    }
    return "?";
}

Section coordinate_section(int n, int index, double value, int direction)
{
    Section s;
    s.normal = Vec::Zero(n);
    s.normal(index) = 1.0;
    s.offset = value;
    s.direction = direction;
    return s;
}

Vec Trajectory::eval_segment(const Segment& s, double tq)
{
    const double th = (tq - s.t0) / s.h;
    if (s.kind == 0) {
        Vec r = s.coef.col(3);
        for (int k = 2; k >= 0; --k) r = s.coef.col(k) + th * r;
        return r;
    }
    const double th1 = 1.0 - th;
    return s.coef.col(0) +
           th * (s.coef.col(1) + th1 * (s.coef.col(2) + th * (s.coef.col(3) + th1 * s.coef.col(4))));
}

Vec Trajectory::eval(double tq) const
{
    if (segments.empty()) {
        if (!t.empty() && tq == t.front()) return y.front();
        throw std::out_of_range("trajectory has no dense output");
    }
    auto it = std::upper_bound(segments.begin(), segments.end(), tq,
                               [](double v, const Segment& s) { return v < s.t0; });
    if (it != segments.begin()) --it;
    if (tq == it->t0 + it->h && it + 1 != segments.end()) ++it;
    return eval_segment(*it, tq);
}

Trajectory integrate(const Field& field, const Vec& y0, double t0, double t1, const IntegratorConfig& cfg,
                     const std::vector<Section>& sections, int stop_after_events)
{
    cfg.validate();
    if (!(t1 > t0)) throw std::invalid_argument("integrate needs t1 > t0");
    const int n = static_cast<int>(y0.size());
    for (const auto& s : sections)
        if (s.normal.size() != n) throw std::invalid_argument("section dimension mismatch");

    Trajectory tr;
    const Counter f{field, tr.fevals};
    double t = t0;
    Vec y = y0;
    Vec fy(n);
    f(t, y, fy);
    if (!fy.allFinite()) {
        tr.reason = Termination::Failure;
        tr.message = "non-finite vector field at the initial state";
        tr.t_end = t;
        tr.y_end = y;
        return tr;
    }
    if (cfg.record) {
        tr.t.push_back(t);
        tr.y.push_back(y);
    }
    const int order = cfg.method == Method::Implicit ? 3 : 4;
    double h = cfg.first_step > 0.0 ? cfg.first_step : initial_step(f, t, y, fy, order, t1 - t0, cfg);

    RadauStepper radau_st(f, cfg, n);
    DopriStepper dopri_st(f, cfg, n);
    if (cfg.method == Method::Implicit) radau_st.set_jacobian(t, y);
    Trajectory::Segment prev;
    bool have_prev = false;

    std::vector<double> g(sections.size());
    for (size_t i = 0; i < sections.size(); ++i) g[i] = sections[i](y);
    int n_events = 0;

    while (t < t1) {
        if (tr.steps >= cfg.max_steps) {
            tr.reason = Termination::Failure;
            tr.message = "maximum number of steps reached at t = " + std::to_string(t);
            break;
        }
        const double min_step = cfg.min_step > 0.0 ? cfg.min_step : 10.0 * kMachEps * std::max(1.0, std::abs(t));
        h = std::min(h, cfg.max_step);
        if (t + h > t1 || t1 - (t + h) < min_step) h = t1 - t;
        if (h < min_step) {
            tr.reason = Termination::Failure;
            tr.message = "step size underflow at t = " + std::to_string(t);
            break;
        }

        bool accepted = false;
        Vec y_new, f_new;
        Trajectory::Segment seg;
        if (cfg.method == Method::Implicit) {
            auto r = radau_st.attempt(t, y, fy, h, have_prev ? &prev : nullptr);
            if (r.newton_failed) {
                if (!radau_st.jac_current()) radau_st.set_jacobian(t, y);
                else h = r.h_next;
                ++tr.rejected;
                continue;
            }
            accepted = r.accepted;
            h = r.h_next;
            if (accepted) {
                y_new = std::move(r.y_new);
                f_new = std::move(r.f_new);
                seg = std::move(r.seg);
            }
        } else {
            auto r = dopri_st.attempt(t, y, fy, h);
            accepted = r.accepted;
            h = r.h_next;
            if (accepted) {
                y_new = std::move(r.y_new);
                f_new = std::move(r.f_new);
                seg = std::move(r.seg);
            }
        }
        if (!accepted) {
            ++tr.rejected;
            continue;
        }
        ++tr.steps;
        if (!y_new.allFinite()) {
            tr.reason = Termination::Failure;
            tr.message = "non-finite state at t = " + std::to_string(t);
            break;
        }

        // section crossings inside this step, earliest first
        double t_stop = seg.t0 + seg.h;
        bool stop = false;
        std::vector<std::pair<double, int>> found;
        for (size_t i = 0; i < sections.size(); ++i) {
            const double gn = sections[i](y_new);
            const int d = sections[i].direction;
            const bool cross = d > 0 ? (g[i] < 0.0 && gn >= 0.0) : (g[i] > 0.0 && gn <= 0.0);
            if (cross) found.emplace_back(refine_crossing(seg, sections[i], g[i], gn), static_cast<int>(i));
            g[i] = gn;
        }
        std::sort(found.begin(), found.end());
        for (const auto& [te, idx] : found) {
            SectionEvent ev;
            ev.t = te;
            ev.y = Trajectory::eval_segment(seg, te);
            ev.section = idx;
            Vec fe(n);
            field(te, ev.y, fe);
            const double rate = sections[idx].normal.dot(fe);
            if (std::abs(rate) < 1e-4 * sections[idx].normal.norm() * fe.norm()) {
                tr.reason = Termination::Failure;
                tr.message = "degenerate (tangential) section crossing at t = " + std::to_string(te);
                tr.t_end = t;
                tr.y_end = y;
                return tr;
            }
            tr.events.push_back(ev);
            ++n_events;
            if (stop_after_events > 0 && n_events >= stop_after_events) {
                t_stop = te;
                stop = true;
                break;
            }
        }

        if (stop) {
            const Vec ye = Trajectory::eval_segment(seg, t_stop);
            if (cfg.record) {
                tr.segments.push_back(seg);
                tr.t.push_back(t_stop);
                tr.y.push_back(ye);
            }
            tr.reason = Termination::Event;
            tr.t_end = t_stop;
            tr.y_end = ye;
            return tr;
        }

        if (cfg.record) {
            tr.segments.push_back(seg);
            tr.t.push_back(t + seg.h);
            tr.y.push_back(y_new);
        }
        prev = std::move(seg);
        have_prev = true;
        t = prev.t0 + prev.h;
        y = std::move(y_new);
        fy = std::move(f_new);
        if (cfg.method == Method::Implicit && radau_st.wants_new_jacobian()) radau_st.set_jacobian(t, y);
    }
    tr.t_end = t;
    tr.y_end = y;
    if (tr.reason != Termination::Failure) tr.reason = Termination::Time;
    return tr;
}

SectionEvent integrate_to_section(const Field& f, const Vec& y0, double t0, const Section& section, double horizon,
                                  const IntegratorConfig& cfg)
{
    IntegratorConfig c = cfg;
    c.record = false;
    const Trajectory tr = integrate(f, y0, t0, t0 + horizon, c, {section}, 1);
    if (tr.reason == Termination::Failure) throw IntegrationError(tr.message);
    if (tr.events.empty()) throw IntegrationError("no section crossing within the horizon");
    return tr.events.front();
}

Mat fd_jacobian(const Field& f, double t, const Vec& y)
{
    const int n = static_cast<int>(y.size());
    Mat J(n, n);
    Vec yp = y, ym = y, fp(n), fm(n);
    const double s = std::sqrt(kMachEps);
    for (int j = 0; j < n; ++j) {
        const double d = s * (1.0 + std::abs(y(j)));
        yp(j) = y(j) + d;
        ym(j) = y(j) - d;
        f(t, yp, fp);
        f(t, ym, fm);
        J.col(j) = (fp - fm) / (yp(j) - ym(j));
        yp(j) = ym(j) = y(j);
    }
    return J;
}

TangentResult propagate_tangent(const Field& f, const Vec& y0, const Vec& v0, double t0, double t1,
                                const IntegratorConfig& cfg)
{
    const int n = static_cast<int>(y0.size());
    if (v0.size() != n) throw std::invalid_argument("tangent dimension mismatch");
    const Field aug = [&f, n](double t, const Vec& z, Vec& dz) {
        const Vec y = z.head(n);
        Vec fy(n);
        f(t, y, fy);
        dz.resize(2 * n);
        dz.head(n) = fy;
        dz.tail(n) = fd_jacobian(f, t, y) * z.tail(n);
    };
    Vec z0(2 * n);
    z0 << y0, v0;
    TangentResult r;
    r.trajectory = integrate(aug, z0, t0, t1, cfg);
    if (!r.trajectory.ok()) throw IntegrationError(r.trajectory.message);
    r.y = r.trajectory.y_end.head(n);
    r.v = r.trajectory.y_end.tail(n);
    return r;
}

}  // namespace calcium::ode
