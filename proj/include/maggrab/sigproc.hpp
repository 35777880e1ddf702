#pragma once

#include "maggrab/geom.hpp"

#include <array>
#include <iosfwd>
#include <vector>

namespace maggrab {

/// Fixed-rate 3-axis time series from one magnetometer (sensor frame, tesla).
struct SampleWindow {
    double rate = 0.0;  // Hz
    double t0 = 0.0;    // s, time of sample 0
    std::vector<double> xs;
    std::vector<double> ys;
    std::vector<double> zs;

    std::size_t size() const { return xs.size(); }
    double time_at(std::size_t k) const { return t0 + static_cast<double>(k) / rate; }
    Vec3 sample(std::size_t k) const { return {xs[k], ys[k], zs[k]}; }
    void push_back(const Vec3& b);

    /// Throws InvalidArgument unless rate > 0 and all axes have n >= 2 samples.
    void validate() const;
};

/// Per-axis amplitude and phase of a single DFT bin.
struct PhasorTriplet {
    Vec3 amplitude;                  // T, each >= 0
    std::array<double, 3> phase{};   // rad, in (-pi, pi]
};

/// AC field vector at the target frequency. Defined up to a global sign:
/// v and -v describe the same measurement.
struct FieldVectorEstimate {
    Vec3 vector;
    double target_frequency = 0.0;
};

inline constexpr double kDefaultAmplitudeFloor = 1e-7;  // T

/// Principal value of an angle in (-pi, pi].
double wrap_angle(double a);

/// amplitude = (2/n) |sum s[k] exp(-j 2 pi f k / rate)|, phase = arg of the sum.
/// Exact for bin-aligned tones (f n / rate integral); DC is rejected in that case.
/// Throws NyquistViolation when f >= rate / 2.
PhasorTriplet single_bin_dft(const SampleWindow& w, double f);

/// Signs each axis relative to the largest-amplitude axis: negative when the
/// wrapped phase difference exceeds pi/2 in magnitude. Axes below the floor
/// keep a positive sign. Ties for largest go to the lower axis index.
/// Throws AllAxesBelowFloor.
FieldVectorEstimate resolve_signs(const PhasorTriplet& p, double amplitude_floor = kDefaultAmplitudeFloor);

FieldVectorEstimate extract_field_vector(const SampleWindow& w, double f,
                                         double amplitude_floor = kDefaultAmplitudeFloor);

// CSV with header `t,bx,by,bz`, one row per sample, SI units.
void write_window_csv(std::ostream& out, const SampleWindow& w);

/// Reads every row of a `t,bx,by,bz` CSV. The caller supplies the nominal
/// sample rate; timestamps must agree with it to 1e-6 of a sample period.
/// Throws SchemaError on a bad header, malformed row, inconsistent timing or
/// an empty file.
SampleWindow read_window_csv(std::istream& in, double rate);

/// Consecutive non-overlapping windows of `length` samples; a trailing
/// partial window is dropped.
std::vector<SampleWindow> split_windows(const SampleWindow& stream, std::size_t length);

} // namespace maggrab
