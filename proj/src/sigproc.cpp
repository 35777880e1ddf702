#include "maggrab/sigproc.hpp"

#include "maggrab/errors.hpp"
#include "maggrab/textio.hpp"

#include <complex>
#include <istream>
#include <ostream>
#include <string>

namespace maggrab {

void SampleWindow::push_back(const Vec3& b)
{
    xs.push_back(b.x);
    ys.push_back(b.y);
    zs.push_back(b.z);
}

void SampleWindow::validate() const
{
    if (!(rate > 0.0) || !std::isfinite(rate)) {
        throw InvalidArgument("sample window rate must be > 0");
    }
    if (xs.size() != ys.size() || xs.size() != zs.size()) {
        throw InvalidArgument("sample window axes differ in length");
    }
    if (xs.size() < 2) {
        throw InvalidArgument("sample window needs at least 2 samples");
    }
}

double wrap_angle(double a)
{
    double r = std::remainder(a, 2.0 * kPi);
    if (r <= -kPi) {
        r += 2.0 * kPi;
    }
    if (r > kPi) {
        r -= 2.0 * kPi;
    }
    return r;
}

PhasorTriplet single_bin_dft(const SampleWindow& w, double f)
{
    w.validate();
    if (!(f < w.rate / 2.0) || !(f > 0.0)) {
        throw NyquistViolation("target frequency must lie in (0, rate/2)");
    }

    const std::size_t n = w.size();
    const double cycles_per_sample = f / w.rate;
    std::array<std::complex<double>, 3> acc{};
    for (std::size_t k = 0; k < n; ++k) {
        // Reduce the phase to one turn before scaling by 2 pi so long windows
        // do not lose precision in the twiddle argument.
        const double turns = std::fmod(cycles_per_sample * static_cast<double>(k), 1.0);
        const std::complex<double> twiddle = std::polar(1.0, -2.0 * kPi * turns);
        acc[0] += w.xs[k] * twiddle;
        acc[1] += w.ys[k] * twiddle;
        acc[2] += w.zs[k] * twiddle;
    }

    PhasorTriplet out;
    const double scale = 2.0 / static_cast<double>(n);
    out.amplitude = {std::abs(acc[0]) * scale, std::abs(acc[1]) * scale, std::abs(acc[2]) * scale};
    for (int i = 0; i < 3; ++i) {
        out.phase[i] = wrap_angle(std::arg(acc[i]));
    }
    return out;
}

FieldVectorEstimate resolve_signs(const PhasorTriplet& p, double amplitude_floor)
{
    int ref = 0;
    for (int i = 1; i < 3; ++i) {
        if (p.amplitude[i] > p.amplitude[ref]) {
            ref = i;
        }
    }
    if (!(p.amplitude[ref] >= amplitude_floor)) {
        throw AllAxesBelowFloor();
    }

    std::array<double, 3> signed_amp{p.amplitude.x, p.amplitude.y, p.amplitude.z};
    for (int i = 0; i < 3; ++i) {
        if (i == ref || p.amplitude[i] < amplitude_floor) {
            continue;
        }
        const double diff = wrap_angle(p.phase[i] - p.phase[ref]);
        if (std::abs(diff) > kPi / 2.0) {
            signed_amp[i] = -signed_amp[i];
        }
    }
    return {{signed_amp[0], signed_amp[1], signed_amp[2]}, 0.0};
}

FieldVectorEstimate extract_field_vector(const SampleWindow& w, double f, double amplitude_floor)
{
    FieldVectorEstimate est = resolve_signs(single_bin_dft(w, f), amplitude_floor);
    est.target_frequency = f;
    return est;
}

void write_window_csv(std::ostream& out, const SampleWindow& w)
{
    using textio::format_double;
    out << "t,bx,by,bz\n";
    for (std::size_t k = 0; k < w.size(); ++k) {
        out << format_double(w.time_at(k)) << ',' << format_double(w.xs[k]) << ',' << format_double(w.ys[k])
            << ',' << format_double(w.zs[k]) << '\n';
    }
}

SampleWindow read_window_csv(std::istream& in, double rate)
{
    if (!(rate > 0.0)) {
        throw InvalidArgument("sample rate must be > 0");
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw SchemaError("empty sample CSV");
    }
    if (textio::trim(line) != "t,bx,by,bz") {
        throw SchemaError("sample CSV header must be 't,bx,by,bz'");
    }

    SampleWindow w;
    w.rate = rate;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (textio::trim(line).empty()) {
            continue;
        }
        const auto cells = textio::split(line);
        if (cells.size() != 4) {
            throw SchemaError("sample CSV row " + std::to_string(row + 1) + " does not have 4 fields");
        }
        std::array<double, 4> v{};
        for (std::size_t i = 0; i < 4; ++i) {
            const auto parsed = textio::parse_double(cells[i]);
            if (!parsed || !std::isfinite(*parsed)) {
                throw SchemaError("sample CSV row " + std::to_string(row + 1) + " has a non-numeric field");
            }
            v[i] = *parsed;
        }
        if (row == 0) {
            w.t0 = v[0];
        } else if (std::abs(v[0] - w.time_at(row)) > 1e-6 / rate) {
            throw SchemaError("sample CSV row " + std::to_string(row + 1) + " timestamp inconsistent with rate");
        }
        w.push_back({v[1], v[2], v[3]});
        ++row;
    }
    if (row == 0) {
        throw SchemaError("sample CSV has no samples");
    }
    return w;
}

std::vector<SampleWindow> split_windows(const SampleWindow& stream, std::size_t length)
{
    if (length < 2) {
        throw InvalidArgument("window length must be >= 2");
    }
    std::vector<SampleWindow> out;
    for (std::size_t start = 0; start + length <= stream.size(); start += length) {
        SampleWindow w;
        w.rate = stream.rate;
        w.t0 = stream.time_at(start);
        w.xs.assign(stream.xs.begin() + start, stream.xs.begin() + start + length);
        w.ys.assign(stream.ys.begin() + start, stream.ys.begin() + start + length);
        w.zs.assign(stream.zs.begin() + start, stream.zs.begin() + start + length);
        out.push_back(std::move(w));
    }
    return out;
}

} // namespace maggrab
