#include "oracles.hpp"

#include "wbplan/robot/flat.hpp"
#include "wbplan/robot/kinematics.hpp"
#include "wbplan/traj/minco.hpp"

#include <gtest/gtest.h>

#include <Eigen/Geometry>

using namespace wbp;
using namespace wbp::robot;

namespace
{
    // Independent chain composition with homogeneous transforms.
    Eigen::Isometry3d linkTransformOracle(const RobotModel &m, const SE2 &base, const Eigen::VectorXd &q, int link)
    {
        auto fixed = [](const Eigen::Vector3d &xyz, const Eigen::Vector3d &rpy)
        {
            Eigen::Isometry3d T = Eigen::Isometry3d::Identity();
            T.translate(xyz);
            T.rotate(Eigen::AngleAxisd(rpy.z(), Eigen::Vector3d::UnitZ()));
            T.rotate(Eigen::AngleAxisd(rpy.y(), Eigen::Vector3d::UnitY()));
            T.rotate(Eigen::AngleAxisd(rpy.x(), Eigen::Vector3d::UnitX()));
            return T;
        };
        Eigen::Isometry3d T = Eigen::Isometry3d::Identity();
        T.translate(Eigen::Vector3d(base.x, base.y, 0.0));
        T.rotate(Eigen::AngleAxisd(base.theta, Eigen::Vector3d::UnitZ()));
        T = T * fixed(m.mount.xyz, m.mount.rpy);
        for (int k = 0; k < link; ++k)
        {
            T = T * fixed(m.joints[k].origin_xyz, m.joints[k].origin_rpy);
            T.rotate(Eigen::AngleAxisd(q(k), m.joints[k].axis));
        }
        return T;
    }

    RobotModel planarTwoLink(double h)
    {
        RobotModel m;
        Joint j1, j2;
        j2.origin_xyz = Eigen::Vector3d(0.5, 0.0, 0.0);
        m.joints = {j1, j2};
        m.mount.xyz = Eigen::Vector3d(0.0, 0.0, h);
        m.ee_offset.xyz = Eigen::Vector3d(0.5, 0.0, 0.0);
        m.limits.q_max = Eigen::VectorXd::Constant(2, 3.0);
        m.limits.dq_max = Eigen::VectorXd::Constant(2, 1.0);
        m.limits.ddq_max = Eigen::VectorXd::Constant(2, 1.0);
        m.travel_q = Eigen::VectorXd::Zero(2);
        return m;
    }

    Eigen::VectorXd randomJoints(Rng &rng, const RobotModel &m, double frac = 0.9)
    {
        Eigen::VectorXd q(m.dof());
        for (int k = 0; k < m.dof(); ++k)
            q(k) = rng.uniform(-frac, frac) * m.limits.q_max(k);
        return q;
    }
} // namespace

TEST(Kinematics, HomePoseIsProductOfFixedFrames)
{
    const auto m = defaultRobot();
    const auto ee = forwardKinematics(m, SE2{}, Eigen::VectorXd::Zero(6));
    EXPECT_NEAR((ee.p - Eigen::Vector3d(0.0, 0.0, 0.4 + 0.1 + 0.1 + 0.4 + 0.3 + 0.1 + 0.08 + 0.1)).norm(), 0.0, 1e-12);
    EXPECT_NEAR((ee.R - Eigen::Matrix3d::Identity()).norm(), 0.0, 1e-12);
}

TEST(Kinematics, PlanarTwoLink)
{
    const auto m = planarTwoLink(0.7);
    const Eigen::Vector2d q(kPi / 2.0, 0.0);
    const auto ee = forwardKinematics(m, SE2{}, q);
    EXPECT_NEAR((ee.p - Eigen::Vector3d(0.0, 1.0, 0.7)).norm(), 0.0, 1e-12);
}

TEST(Kinematics, BaseEquivariance)
{
    const auto m = defaultRobot();
    Rng rng(4);
    for (int k = 0; k < 20; ++k)
    {
        const Eigen::VectorXd q = randomJoints(rng, m);
        const SE2 b{rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-kPi, kPi)};
        const auto local = forwardKinematics(m, SE2{}, q);
        const auto world = forwardKinematics(m, b, q);
        const Eigen::Matrix3d Rb = rotZ(b.theta);
        EXPECT_NEAR((world.p - (Rb * local.p + Eigen::Vector3d(b.x, b.y, 0.0))).norm(), 0.0, 1e-12);
        EXPECT_NEAR((world.R - Rb * local.R).norm(), 0.0, 1e-12);
        const auto shifted = forwardKinematics(m, SE2{b.x + 1.5, b.y - 0.5, b.theta}, q);
        EXPECT_NEAR((shifted.p - world.p - Eigen::Vector3d(1.5, -0.5, 0.0)).norm(), 0.0, 1e-12);
    }
}

TEST(Kinematics, MatchesHomogeneousOracle)
{
    const auto m = defaultRobot();
    Rng rng(5);
    for (int k = 0; k < 20; ++k)
    {
        const Eigen::VectorXd q = randomJoints(rng, m);
        const SE2 b{rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-kPi, kPi)};
        const auto pts = collisionPoints(m, b, q);
        ASSERT_EQ(static_cast<int>(pts.size()), m.collision.pointCount());
        EXPECT_NEAR((pts[0].center - Eigen::Vector3d(b.x, b.y, 0.2)).norm(), 0.0, 1e-12);
        for (std::size_t i = 0; i < m.collision.spheres.size(); ++i)
        {
            const auto &s = m.collision.spheres[i];
            const Eigen::Vector3d oracle = linkTransformOracle(m, b, q, s.link) * s.offset;
            EXPECT_NEAR((pts[i + 1].center - oracle).norm(), 0.0, 1e-12);
            EXPECT_EQ(pts[i + 1].radius, s.radius);
        }
        const auto ee = forwardKinematics(m, b, q);
        const Eigen::Isometry3d T = linkTransformOracle(m, b, q, m.dof());
        EXPECT_NEAR((ee.p - T * m.ee_offset.xyz).norm(), 0.0, 1e-12);
    }
}

TEST(Kinematics, RotatingBaseKeepsCylinderCenter)
{
    const auto m = defaultRobot();
    const Eigen::VectorXd q = Eigen::VectorXd::Zero(6);
    const auto a = collisionPoints(m, SE2{1.0, 2.0, 0.3}, q);
    const auto b = collisionPoints(m, SE2{1.0, 2.0, 0.3 + kPi}, q);
    EXPECT_NEAR((a[0].center - b[0].center).norm(), 0.0, 1e-12);
}

TEST(Kinematics, JacobiansMatchFiniteDifferences)
{
    const auto m = defaultRobot();
    Rng rng(6);
    for (int k = 0; k < 10; ++k)
    {
        Eigen::VectorXd z(9);
        z << rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-kPi, kPi), randomJoints(rng, m);
        auto frames = [&](const Eigen::VectorXd &v) { return ChainFrames(m, SE2{v(0), v(1), v(2)}, v.tail(6)); };
        const ChainFrames f = frames(z);
        for (const auto &s : m.collision.spheres)
        {
            const auto J = f.pointJacobian(s.link, f.pointOnLink(s.link, s.offset));
            for (int a = 0; a < 3; ++a)
            {
                const auto fd = test::numericGradient(
                    [&](const Eigen::VectorXd &v) { return frames(v).pointOnLink(s.link, s.offset)(a); }, z);
                EXPECT_LT((J.row(a).transpose() - fd).norm(), 1e-7);
            }
        }
    }
}

TEST(SelfCollision, SphereSphereAndCylinderCases)
{
    RobotModel m = planarTwoLink(0.5);
    m.collision.base = BaseCylinder{0.3, 0.4, Eigen::Vector3d(0.0, 0.0, 0.2)};
    // sphere 1 on link 1 at 0.25 m, sphere 2 on link 2 at 0.25 m: centers 0.5 apart for q = 0
    m.collision.spheres = {{1, Eigen::Vector3d(0.25, 0.0, 0.0), 0.1}, {2, Eigen::Vector3d(0.25, 0.0, 0.0), 0.1}};
    m.collision.self_pairs = {{1, 2}};
    EXPECT_NEAR(selfCollisionDistances(m, Eigen::Vector2d(0.0, 0.0))(0), 0.3, 1e-12);

    // sphere on the cylinder axis midpoint
    RobotModel c = planarTwoLink(0.2);
    c.collision.base = BaseCylinder{0.3, 0.4, Eigen::Vector3d(0.0, 0.0, 0.2)};
    c.collision.spheres = {{0, Eigen::Vector3d::Zero(), 0.05}};
    c.collision.self_pairs = {{0, 1}};
    EXPECT_NEAR(selfCollisionDistances(c, Eigen::Vector2d(0.3, -0.2))(0), -0.35, 1e-12);
}

TEST(SelfCollision, MatchesSurfaceSamplingOracle)
{
    const auto m = defaultRobot();
    const auto &C = m.collision;
    Rng rng(7);
    // sphere surface directions
    std::vector<Eigen::Vector3d> dirs;
    const int nt = 160, np = 320;
    for (int i = 0; i <= nt; ++i)
        for (int j = 0; j < np; ++j)
        {
            const double th = kPi * i / nt, ph = 2.0 * kPi * j / np;
            dirs.emplace_back(std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph), std::cos(th));
        }
    for (int k = 0; k < 10; ++k)
    {
        const Eigen::VectorXd q = randomJoints(rng, m, 1.0);
        const auto pts = collisionPoints(m, SE2{}, q);
        const Eigen::VectorXd d = selfCollisionDistances(m, q);
        for (std::size_t p = 0; p < C.self_pairs.size(); ++p)
        {
            auto [a, b] = C.self_pairs[p];
            if (b == 0)
                std::swap(a, b);
            // sample the surface of sphere b, measure to primitive a; only
            // meaningful while the center of b lies outside the core of a
            const double core = a == 0 ? (pts[b].center - Eigen::Vector3d(0.0, 0.0, std::clamp(pts[b].center.z(), 0.0, C.base.height))).norm()
                                       : (pts[b].center - pts[a].center).norm();
            if (core < pts[b].radius)
                continue;
            double best = kInf;
            for (const auto &u : dirs)
            {
                const Eigen::Vector3d x = pts[b].center + pts[b].radius * u;
                double dist;
                if (a == 0)
                {
                    const double z = std::clamp(x.z(), 0.0, C.base.height);
                    dist = (x - Eigen::Vector3d(0.0, 0.0, z)).norm() - C.base.radius;
                }
                else
                    dist = (x - pts[a].center).norm() - pts[a].radius;
                best = std::min(best, dist);
            }
            EXPECT_NEAR(d(p), best, 1e-3) << "pair " << p;
        }
    }
}

TEST(SelfCollision, JacobianMatchesFiniteDifferences)
{
    const auto m = defaultRobot();
    Rng rng(8);
    for (int k = 0; k < 10; ++k)
    {
        const Eigen::VectorXd q = randomJoints(rng, m);
        Eigen::MatrixXd J;
        const Eigen::VectorXd d = selfCollisionDistances(m, q, &J);
        for (int p = 0; p < d.size(); ++p)
        {
            const auto fd = test::numericGradient(
                [&](const Eigen::VectorXd &v) { return selfCollisionDistances(m, v)(p); }, q);
            EXPECT_LT((J.row(p).transpose() - fd).norm(), 1e-6);
        }
    }
}

TEST(RobotJson, RoundTripAndErrors)
{
    const auto m = defaultRobot();
    const auto j = robotToJson(m);
    const auto back = robotFromJson(j);
    EXPECT_EQ(robotToJson(back).dump(), j.dump());
    auto bad = j;
    bad["limits"]["v_max"] = -1.0;
    EXPECT_THROW(robotFromJson(bad), InputError);
    auto missing = j;
    missing.erase("joints");
    EXPECT_THROW(robotFromJson(missing), InputError);
}

TEST(FlatOutput, StraightLineExact)
{
    traj::WholeBodyTrajectory tr;
    tr.durations = Eigen::Vector2d(1.0, 2.0);
    tr.coeffs = Eigen::MatrixXd::Zero(12, 2);
    const double v = 0.7;
    tr.coeffs(1, traj::kChS) = v; // s = v t on segment 0
    tr.coeffs(6, traj::kChS) = v; // s = v (t + 1) on segment 1
    tr.coeffs(7, traj::kChS) = v;
    tr.x0 = 1.0;
    tr.y0 = -2.0;
    for (const double t : {0.0, 0.3, 1.0, 2.2, 3.0})
    {
        const auto f = flatPosition(tr, t);
        EXPECT_NEAR(f.xy.x(), 1.0 + v * t, 1e-12);
        EXPECT_NEAR(f.xy.y(), -2.0, 1e-12);
    }
}

TEST(FlatOutput, CircularArcClosedForm)
{
    const double v = 0.8, w = 0.6;
    const int M = 6;
    traj::WholeBodyTrajectory tr;
    tr.durations = Eigen::VectorXd::Ones(M);
    tr.coeffs = Eigen::MatrixXd::Zero(6 * M, 2);
    for (int j = 0; j < M; ++j)
    {
        tr.coeffs(6 * j + 0, traj::kChS) = v * j;
        tr.coeffs(6 * j + 1, traj::kChS) = v;
        tr.coeffs(6 * j + 0, traj::kChTheta) = w * j;
        tr.coeffs(6 * j + 1, traj::kChTheta) = w;
    }
    tr.x0 = 0.5;
    tr.y0 = 0.25;
    for (const double t : {0.5, 1.0, 2.75, 4.0, 6.0})
    {
        const auto f = flatPosition(tr, t, 16);
        EXPECT_NEAR(f.xy.x(), 0.5 + v / w * std::sin(w * t), 1e-6);
        EXPECT_NEAR(f.xy.y(), 0.25 + v / w * (1.0 - std::cos(w * t)), 1e-6);
    }
}

TEST(FlatOutput, MatchesFineQuadrature)
{
    Rng rng(9);
    double worst = 0.0;
    for (int k = 0; k < 50; ++k)
    {
        const auto tr = test::randomFlatTrajectory(rng, 1 + k % 5);
        const double t = rng.uniform(0.0, tr.totalDuration());
        const Eigen::Vector2d ref = test::fineQuadrature(tr, t, 800);
        const auto f = flatPosition(tr, t);
        worst = std::max(worst, (f.xy - ref).norm());
    }
    EXPECT_LT(worst, 1e-4);
}

TEST(FlatOutput, AdditiveOverSegmentBoundary)
{
    Rng rng(10);
    const auto tr = test::randomFlatTrajectory(rng, 3);
    const double T1 = tr.durations(0), tl = 0.4 * tr.durations(1);
    const auto whole = flatPosition(tr, T1 + tl);
    const auto first = flatPosition(tr, T1);
    Eigen::Vector2d rest = Eigen::Vector2d::Zero();
    for (int p = 0; p < 8; ++p)
        rest += detail::simpsonPanel(tr.coeffs.block<6, 1>(6, 0), tr.coeffs.block<6, 1>(6, 1), tl, p / 8.0,
                                     (p + 1) / 8.0, false)
                    .value;
    EXPECT_NEAR((whole.xy - first.xy - rest).norm(), 0.0, 1e-12);
}

TEST(FlatOutput, GradientsMatchFiniteDifferences)
{
    Rng rng(11);
    for (int k = 0; k < 5; ++k)
    {
        auto tr = test::randomFlatTrajectory(rng, 3);
        const double t = rng.uniform(0.1, tr.totalDuration() - 0.1);
        const auto f = flatPosition(tr, t, 8, true);
        for (int a = 0; a < 2; ++a)
        {
            // coefficients of s and theta
            for (int ch = 0; ch < 2; ++ch)
            {
                Eigen::VectorXd c = tr.coeffs.col(ch);
                const auto fd = test::numericGradient(
                    [&](const Eigen::VectorXd &v)
                    {
                        auto t2 = tr;
                        t2.coeffs.col(ch) = v;
                        return flatPosition(t2, t, 8).xy(a);
                    },
                    c);
                const Eigen::VectorXd an = (ch == 0 ? f.d_cs : f.d_cth).row(a).transpose();
                EXPECT_LT(test::relativeError(an, fd, 1.0), 1e-6);
            }
            const auto fdT = test::numericGradient(
                [&](const Eigen::VectorXd &v)
                {
                    auto t2 = tr;
                    t2.durations = v;
                    return flatPosition(t2, t, 8).xy(a);
                },
                tr.durations);
            EXPECT_LT(test::relativeError(f.d_T.row(a).transpose(), fdT, 1.0), 1e-6);
        }
    }
}

TEST(FlatGrid, BackwardMatchesFiniteDifferences)
{
    Rng rng(12);
    const auto tr = test::randomFlatTrajectory(rng, 3);
    const int K = 6;
    FlatGrid grid;
    grid.compute(tr, K);
    Eigen::Matrix2Xd W(2, grid.pointCount());
    for (int i = 0; i < W.cols(); ++i)
        W.col(i) = test::randomVector(rng, 2, -1.0, 1.0);
    auto J = [&](const traj::WholeBodyTrajectory &t)
    {
        FlatGrid g;
        g.compute(t, K);
        double s = 0.0;
        for (int i = 0; i < g.pointCount(); ++i)
            s += W.col(i).dot(g.point(i));
        return s;
    };
    Eigen::MatrixXd gc = Eigen::MatrixXd::Zero(tr.coeffs.rows(), tr.coeffs.cols());
    Eigen::VectorXd gT = Eigen::VectorXd::Zero(tr.pieces());
    grid.backward(W, gc, gT);
    Eigen::VectorXd flat = Eigen::Map<const Eigen::VectorXd>(tr.coeffs.data(), tr.coeffs.size());
    const auto fdc = test::numericGradient(
        [&](const Eigen::VectorXd &v)
        {
            auto t2 = tr;
            t2.coeffs = Eigen::Map<const Eigen::MatrixXd>(v.data(), tr.coeffs.rows(), tr.coeffs.cols());
            return J(t2);
        },
        flat);
    EXPECT_LT(test::relativeError(Eigen::Map<Eigen::VectorXd>(gc.data(), gc.size()), fdc), 1e-6);
    const auto fdT = test::numericGradient(
        [&](const Eigen::VectorXd &v)
        {
            auto t2 = tr;
            t2.durations = v;
            return J(t2);
        },
        tr.durations);
    EXPECT_LT(test::relativeError(gT, fdT), 1e-6);
    EXPECT_LT((grid.end() - test::fineQuadrature(tr, tr.totalDuration(), 800)).norm(), 1e-4);
}
