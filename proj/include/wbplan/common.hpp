#ifndef WBPLAN_COMMON_HPP
#define WBPLAN_COMMON_HPP

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace wbp
{
    constexpr double kPi = std::numbers::pi;
    constexpr double kInf = std::numeric_limits<double>::infinity();

    // Thrown for malformed user input (files, parameters). Solver outcomes
    // are reported through status enums, never through exceptions.
    class InputError : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };

    inline double wrapAngle(double a)
    {
        a = std::fmod(a + kPi, 2.0 * kPi);
        if (a < 0.0)
            a += 2.0 * kPi;
        return a - kPi;
    }

    // Portable seeded generator. Distributions are implemented here instead
    // of <random> so that sequences are identical across standard libraries.
    class Rng
    {
    public:
        explicit Rng(std::uint64_t seed = 0) : state_(seed) {}

        std::uint64_t next()
        {
            std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
            z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
            z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
            return z ^ (z >> 31);
        }

        // Uniform in [0, 1).
        double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

        double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

        // Uniform integer in [lo, hi].
        int uniformInt(int lo, int hi)
        {
            const auto span = static_cast<std::uint64_t>(hi - lo) + 1u;
            return lo + static_cast<int>(next() % span);
        }

        double normal()
        {
            double u1 = uniform();
            while (u1 <= 0.0)
                u1 = uniform();
            const double u2 = uniform();
            return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
        }

    private:
        std::uint64_t state_;
    };

    // Derives an independent stream seed from a parent seed and an index.
    inline std::uint64_t mixSeed(std::uint64_t seed, std::uint64_t index)
    {
        Rng r(seed ^ (0xD1B54A32D192ED03ull * (index + 1)));
        r.next();
        return r.next();
    }

    inline Eigen::Matrix3d rotZ(double yaw)
    {
        const double c = std::cos(yaw), s = std::sin(yaw);
        Eigen::Matrix3d R;
        R << c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0;
        return R;
    }

    inline Eigen::Matrix3d rpyToMatrix(const Eigen::Vector3d &rpy)
    {
        if (rpy.isZero(0.0))
            return Eigen::Matrix3d::Identity();
        return (Eigen::AngleAxisd(rpy.z(), Eigen::Vector3d::UnitZ()) *
                Eigen::AngleAxisd(rpy.y(), Eigen::Vector3d::UnitY()) *
                Eigen::AngleAxisd(rpy.x(), Eigen::Vector3d::UnitX()))
            .toRotationMatrix();
    }

    inline Eigen::Matrix3d skew(const Eigen::Vector3d &v)
    {
        Eigen::Matrix3d S;
        S << 0.0, -v.z(), v.y(), v.z(), 0.0, -v.x(), -v.y(), v.x(), 0.0;
        return S;
    }

    struct SE2
    {
        double x = 0.0;
        double y = 0.0;
        double theta = 0.0;
    };

    struct SE3Pose
    {
        Eigen::Matrix3d R = Eigen::Matrix3d::Identity();
        Eigen::Vector3d p = Eigen::Vector3d::Zero();
    };

} // namespace wbp

#endif
