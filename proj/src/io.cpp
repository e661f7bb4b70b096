#include "sdeu/io.hpp"

#include "sdeu/error.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

namespace sdeu {
namespace {

// ---- JSON helpers ----

Json matrix_json(const Matrix& m) {
    Json rows = Json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        Json row = Json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

const Json& field(const Json& j, const char* name) {
    if (!j.is_object()) throw FormatError(std::string("expected object holding '") + name + "'");
    const auto it = j.find(name);
    if (it == j.end()) throw FormatError(std::string("missing field '") + name + "'");
    return *it;
}

template <class T>
T get_as(const Json& j, const char* name) {
    try {
        return field(j, name).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("field '") + name + "': " + e.what());
    }
}

Matrix matrix_from(const Json& j, const char* name) {
    const Json& rows = field(j, name);
    if (!rows.is_array()) throw FormatError(std::string("field '") + name + "' must be an array of rows");
    const auto n = static_cast<Eigen::Index>(rows.size());
    const Eigen::Index m = n == 0 ? 0 : static_cast<Eigen::Index>(rows[0].size());
    Matrix out(n, m);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Json& row = rows[static_cast<std::size_t>(i)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != m) {
            throw FormatError(std::string("field '") + name + "' has ragged rows");
        }
        for (Eigen::Index k = 0; k < m; ++k) {
            const Json& v = row[static_cast<std::size_t>(k)];
            if (!v.is_number()) throw FormatError(std::string("field '") + name + "' holds a non-number");
            out(i, k) = v.get<double>();
        }
    }
    return out;
}

std::vector<Matrix> matrices_from(const Json& j, const char* name) {
    const Json& arr = field(j, name);
    if (!arr.is_array()) throw FormatError(std::string("field '") + name + "' must be an array");
    std::vector<Matrix> out;
    for (const Json& m : arr) out.push_back(matrix_from(Json{{"m", m}}, "m"));
    return out;
}

Json matrices_json(const std::vector<Matrix>& ms) {
    Json arr = Json::array();
    for (const Matrix& m : ms) arr.push_back(matrix_json(m));
    return arr;
}

template <class E>
E enum_from(const Json& j, const char* name, std::initializer_list<E> values) {
    const auto s = get_as<std::string>(j, name);
    for (E v : values) {
        if (s == to_string(v)) return v;
    }
    throw FormatError(std::string("field '") + name + "' has unknown value '" + s + "'");
}

// ---- little-endian primitives ----

void put_u32(Bytes& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u64(Bytes& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_f64(Bytes& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

class Reader {
public:
    Reader(std::span<const std::uint8_t> bytes, std::size_t& offset) : bytes_(bytes), offset_(offset) {}

    void need(std::size_t n, const char* what) const {
        if (bytes_.size() < offset_ || bytes_.size() - offset_ < n) {
            throw FormatError(std::string("truncated input while reading ") + what, bytes_.size());
        }
    }
    std::uint32_t u32(const char* what) {
        need(4, what);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[offset_ + i]) << (8 * i);
        offset_ += 4;
        return v;
    }
    std::uint64_t u64(const char* what) {
        need(8, what);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes_[offset_ + i]) << (8 * i);
        offset_ += 8;
        return v;
    }
    double f64(const char* what) { return std::bit_cast<double>(u64(what)); }
    std::span<const std::uint8_t> take(std::size_t n, const char* what) {
        need(n, what);
        auto s = bytes_.subspan(offset_, n);
        offset_ += n;
        return s;
    }
    [[nodiscard]] std::size_t offset() const { return offset_; }

private:
    std::span<const std::uint8_t> bytes_;
    std::size_t& offset_;
};

struct FrameHeader {
    std::uint32_t s, h, d, flags;
    double dt;
};

Bytes encode_raw(std::uint32_t s, std::uint32_t h, std::uint32_t d, std::uint32_t flags, double dt,
                 const std::vector<double>& values, const std::vector<std::uint8_t>* regimes) {
    Bytes out;
    out.reserve(kFrameHeaderSize + values.size() * 8 + (regimes ? regimes->size() : 0));
    out.insert(out.end(), {'S', 'D', 'E', 'U'});
    put_u32(out, kFrameVersion);
    put_u32(out, s);
    put_u32(out, h);
    put_u32(out, d);
    put_u32(out, flags);
    put_f64(out, dt);
    for (double v : values) put_f64(out, v);
    if (regimes) out.insert(out.end(), regimes->begin(), regimes->end());
    return out;
}

std::uint32_t checked_u32(std::size_t v, const char* what) {
    if (v > 0xffffffffu) throw FormatError(std::string(what) + " does not fit the frame header");
    return static_cast<std::uint32_t>(v);
}

FrameHeader read_header(Reader& r) {
    const std::size_t start = r.offset();
    const auto magic = r.take(4, "frame magic");
    if (std::memcmp(magic.data(), "SDEU", 4) != 0) throw FormatError("bad frame magic", start);
    const std::uint32_t version = r.u32("frame version");
    if (version != kFrameVersion) {
        throw FormatError("unsupported frame version " + std::to_string(version), start + 4);
    }
    FrameHeader h{};
    h.s = r.u32("S");
    h.h = r.u32("H");
    h.d = r.u32("D");
    h.flags = r.u32("flags");
    h.dt = r.f64("dt");
    if ((h.flags & ~1u) != 0) throw FormatError("unknown frame flags", start + 20);
    return h;
}

std::vector<double> read_payload(Reader& r, std::size_t count) {
    const auto raw = r.take(count * 8, "frame payload");
    std::vector<double> out(count);
    for (std::size_t i = 0; i < count; ++i) {
        std::uint64_t v = 0;
        for (int b = 0; b < 8; ++b) v |= static_cast<std::uint64_t>(raw[i * 8 + b]) << (8 * b);
        out[i] = std::bit_cast<double>(v);
    }
    return out;
}

void expect_consumed(std::span<const std::uint8_t> bytes, std::size_t offset) {
    if (offset != bytes.size()) throw FormatError("trailing bytes after frame", offset);
}

std::vector<std::string> split_lines(std::string_view text) {
    std::vector<std::string> lines;
    std::size_t pos = 0;
    while (pos < text.size()) {
        const auto end = text.find('\n', pos);
        const auto line = text.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos);
        if (!line.empty()) lines.emplace_back(line);
        if (end == std::string_view::npos) break;
        pos = end + 1;
    }
    return lines;
}

}  // namespace

// ---- spec JSON ----

Json to_json(const SdeSystemSpec& spec) {
    Json drift = Json::array();
    for (const DriftSpec& d : spec.drift) {
        drift.push_back({{"kind", to_string(d.kind)},
                         {"level_param", d.level_param},
                         {"rate", d.rate},
                         {"forcing_amplitude", d.forcing_amplitude},
                         {"forcing_frequency", d.forcing_frequency},
                         {"forcing_phase", d.forcing_phase}});
    }
    const auto& diff = spec.diffusion;
    const auto& jp = spec.jumps;
    const auto& rg = spec.regimes;
    return {
        {"n_features", spec.n_features},
        {"n_targets", spec.n_targets},
        {"level", spec.level.value()},
        {"drift", std::move(drift)},
        {"diffusion",
         {{"base_vol", diff.base_vol},
          {"state_scale", diff.state_scale},
          {"correlation_structure", to_string(diff.correlation_structure)},
          {"correlation", matrix_json(diff.correlation.entries)},
          {"chol", matrix_json(diff.chol.lower)}}},
        {"jumps",
         {{"enabled", jp.enabled},
          {"intensity", jp.intensity},
          {"jump_mean", jp.jump_mean},
          {"jump_std", jp.jump_std},
          {"common_jump_prob", jp.common_jump_prob}}},
        {"regimes",
         {{"enabled", rg.enabled},
          {"mechanism", to_string(rg.mechanism)},
          {"n_regimes", rg.n_regimes},
          {"drift_offset", rg.drift_offset},
          {"telegraph_rates", rg.telegraph_rates},
          {"logistic_max_rate", rg.logistic_max_rate},
          {"logistic_slope", rg.logistic_slope},
          {"logistic_bias", rg.logistic_bias}}},
        {"init_state", spec.init_state},
    };
}

SdeSystemSpec spec_from_json(const Json& j) {
    SdeSystemSpec spec;
    spec.n_features = get_as<int>(j, "n_features");
    spec.n_targets = get_as<int>(j, "n_targets");
    spec.level = CurriculumLevel(get_as<int>(j, "level"));

    const Json& drift = field(j, "drift");
    if (!drift.is_array()) throw FormatError("field 'drift' must be an array");
    for (const Json& d : drift) {
        DriftSpec ds;
        ds.kind = enum_from(d, "kind", {DriftKind::constant, DriftKind::linear_mean_reversion,
                                        DriftKind::tanh_saturating, DriftKind::cubic_damped});
        ds.level_param = get_as<double>(d, "level_param");
        ds.rate = get_as<double>(d, "rate");
        ds.forcing_amplitude = get_as<double>(d, "forcing_amplitude");
        ds.forcing_frequency = get_as<double>(d, "forcing_frequency");
        ds.forcing_phase = get_as<double>(d, "forcing_phase");
        spec.drift.push_back(ds);
    }

    const Json& diff = field(j, "diffusion");
    spec.diffusion.base_vol = get_as<std::vector<double>>(diff, "base_vol");
    spec.diffusion.state_scale = get_as<std::vector<double>>(diff, "state_scale");
    spec.diffusion.correlation_structure =
        enum_from(diff, "correlation_structure", {CorrelationStructure::identity, CorrelationStructure::block,
                                                  CorrelationStructure::cross_block, CorrelationStructure::global});
    spec.diffusion.correlation = {matrix_from(diff, "correlation")};
    spec.diffusion.chol = {matrix_from(diff, "chol")};

    const Json& jp = field(j, "jumps");
    spec.jumps.enabled = get_as<bool>(jp, "enabled");
    spec.jumps.intensity = get_as<std::vector<double>>(jp, "intensity");
    spec.jumps.jump_mean = get_as<std::vector<double>>(jp, "jump_mean");
    spec.jumps.jump_std = get_as<std::vector<double>>(jp, "jump_std");
    spec.jumps.common_jump_prob = get_as<double>(jp, "common_jump_prob");

    const Json& rg = field(j, "regimes");
    spec.regimes.enabled = get_as<bool>(rg, "enabled");
    spec.regimes.mechanism = enum_from(rg, "mechanism", {RegimeMechanism::telegraph, RegimeMechanism::logistic});
    spec.regimes.n_regimes = get_as<int>(rg, "n_regimes");
    spec.regimes.drift_offset = get_as<std::vector<std::vector<double>>>(rg, "drift_offset");
    spec.regimes.telegraph_rates = get_as<std::array<double, 2>>(rg, "telegraph_rates");
    spec.regimes.logistic_max_rate = get_as<double>(rg, "logistic_max_rate");
    spec.regimes.logistic_slope = get_as<std::vector<double>>(rg, "logistic_slope");
    spec.regimes.logistic_bias = get_as<double>(rg, "logistic_bias");

    spec.init_state = get_as<std::vector<double>>(j, "init_state");
    return spec;
}

// ---- head JSON ----

Json to_json(const GmmParams& p) {
    return {{"head", "gmm"},
            {"n_components", p.n_components()},
            {"dims", p.dims()},
            {"weights", p.weights},
            {"means", matrix_json(p.means)},
            {"scale_chols", matrices_json(p.scale_chols)}};
}

GmmParams gmm_from_json(const Json& j) {
    GmmParams p;
    p.weights = get_as<std::vector<double>>(j, "weights");
    p.means = matrix_from(j, "means");
    p.scale_chols = matrices_from(j, "scale_chols");
    if (get_as<std::size_t>(j, "n_components") != p.weights.size()) throw FormatError("gmm: n_components disagrees");
    return p;
}

Json to_json(const SkewTParams& p) {
    return {{"head", "skew_t"},
            {"n_components", p.n_components()},
            {"dims", p.dims()},
            {"weights", p.weights},
            {"dof", p.dof},
            {"locations", matrix_json(p.locations)},
            {"scale_chols", matrices_json(p.scale_chols)},
            {"skews", matrix_json(p.skews)}};
}

SkewTParams skewt_from_json(const Json& j) {
    SkewTParams p;
    p.weights = get_as<std::vector<double>>(j, "weights");
    p.dof = get_as<std::vector<double>>(j, "dof");
    p.locations = matrix_from(j, "locations");
    p.scale_chols = matrices_from(j, "scale_chols");
    p.skews = matrix_from(j, "skews");
    if (get_as<std::size_t>(j, "n_components") != p.weights.size()) throw FormatError("skew_t: n_components disagrees");
    return p;
}

Json to_json(const Garch11Params& p) {
    return {{"omega", p.omega}, {"alpha", p.alpha}, {"beta", p.beta}, {"mean", p.mean}};
}

Json to_json(const DccParams& p) {
    Json series = Json::array();
    for (std::size_t i = 0; i < p.per_series.size(); ++i) {
        Json s = to_json(p.per_series[i]);
        const FitStatus st = i < p.series_status.size() ? p.series_status[i] : FitStatus{};
        s["fit_status"] = st.fallback ? "fallback" : "ok";
        if (st.fallback) s["fit_reason"] = st.reason;
        series.push_back(std::move(s));
    }
    Json out{{"a", p.a},
             {"b", p.b},
             {"unconditional_corr", matrix_json(p.unconditional_corr.entries)},
             {"per_series", std::move(series)},
             {"fit_status", p.correlation_status.fallback ? "fallback" : "ok"}};
    if (p.correlation_status.fallback) out["fit_reason"] = p.correlation_status.reason;
    return out;
}

DccParams dcc_from_json(const Json& j) {
    DccParams p;
    p.a = get_as<double>(j, "a");
    p.b = get_as<double>(j, "b");
    p.unconditional_corr = {matrix_from(j, "unconditional_corr")};
    for (const Json& s : field(j, "per_series")) {
        p.per_series.push_back({get_as<double>(s, "omega"), get_as<double>(s, "alpha"), get_as<double>(s, "beta"),
                                get_as<double>(s, "mean")});
        const bool fb = get_as<std::string>(s, "fit_status") == "fallback";
        p.series_status.push_back({fb, fb ? get_as<std::string>(s, "fit_reason") : std::string{}});
    }
    const bool fb = get_as<std::string>(j, "fit_status") == "fallback";
    p.correlation_status = {fb, fb ? get_as<std::string>(j, "fit_reason") : std::string{}};
    return p;
}

Json parse_json(std::string_view text) {
    try {
        return Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw FormatError(std::string("invalid JSON: ") + e.what(), e.byte);
    }
}

// ---- frames ----

Bytes encode_frame(const SampleSet& set) {
    return encode_raw(checked_u32(set.n_samples, "S"), checked_u32(set.horizon, "H"), checked_u32(set.dims, "D"),
                      0u, set.dt, set.values, nullptr);
}

Bytes encode_frame(const PathMatrix& path) {
    const auto* regimes = path.regime_trace ? &*path.regime_trace : nullptr;
    return encode_raw(1u, checked_u32(path.n_steps, "T"), checked_u32(path.dims, "D"), regimes ? 1u : 0u,
                      path.dt, path.values, regimes);
}

SampleSet decode_sample_set(std::span<const std::uint8_t> bytes, std::size_t& offset) {
    Reader r(bytes, offset);
    const FrameHeader h = read_header(r);
    SampleSet out;
    out.n_samples = h.s;
    out.horizon = h.h;
    out.dims = h.d;
    out.dt = h.dt;
    out.values = read_payload(r, static_cast<std::size_t>(h.s) * h.h * h.d);
    if (h.flags & 1u) r.take(static_cast<std::size_t>(h.s) * h.h, "regime trace");
    return out;
}

PathMatrix decode_path(std::span<const std::uint8_t> bytes, std::size_t& offset) {
    const std::size_t start = offset;
    Reader r(bytes, offset);
    const FrameHeader h = read_header(r);
    if (h.s != 1) throw FormatError("path frame must have S = 1", start + 8);
    PathMatrix out;
    out.n_steps = h.h;
    out.dims = h.d;
    out.dt = h.dt;
    out.values = read_payload(r, static_cast<std::size_t>(h.h) * h.d);
    if (h.flags & 1u) {
        const auto raw = r.take(h.h, "regime trace");
        out.regime_trace.emplace(raw.begin(), raw.end());
    }
    return out;
}

SampleSet decode_sample_set(std::span<const std::uint8_t> bytes) {
    std::size_t offset = 0;
    SampleSet s = decode_sample_set(bytes, offset);
    expect_consumed(bytes, offset);
    return s;
}

PathMatrix decode_path(std::span<const std::uint8_t> bytes) {
    std::size_t offset = 0;
    PathMatrix p = decode_path(bytes, offset);
    expect_consumed(bytes, offset);
    return p;
}

// ---- NDJSON ----

std::string to_ndjson(const SampleSet& set) {
    std::ostringstream out;
    out << Json{{"format", "SDEU"}, {"version", kFrameVersion}, {"kind", "sample_set"}, {"S", set.n_samples},
                {"H", set.horizon}, {"D", set.dims}, {"dt", set.dt}}
               .dump()
        << '\n';
    for (std::size_t s = 0; s < set.n_samples; ++s) {
        Json rows = Json::array();
        for (std::size_t h = 0; h < set.horizon; ++h) {
            Json row = Json::array();
            for (std::size_t d = 0; d < set.dims; ++d) row.push_back(set.at(s, h, d));
            rows.push_back(std::move(row));
        }
        out << Json{{"sample", s}, {"values", std::move(rows)}}.dump() << '\n';
    }
    return out.str();
}

std::string to_ndjson(const PathMatrix& path) {
    std::ostringstream out;
    out << Json{{"format", "SDEU"}, {"version", kFrameVersion}, {"kind", "path"}, {"S", 1},
                {"H", path.n_steps}, {"D", path.dims}, {"dt", path.dt}}
               .dump()
        << '\n';
    Json rows = Json::array();
    for (std::size_t t = 0; t < path.n_steps; ++t) {
        Json row = Json::array();
        for (std::size_t d = 0; d < path.dims; ++d) row.push_back(path.at(t, d));
        rows.push_back(std::move(row));
    }
    Json line{{"sample", 0}, {"values", std::move(rows)}};
    if (path.regime_trace) line["regimes"] = *path.regime_trace;
    out << line.dump() << '\n';
    return out.str();
}

namespace {

struct NdjsonBody {
    Json header;
    std::vector<Json> lines;
};

NdjsonBody parse_ndjson(std::string_view text, const char* kind) {
    const auto lines = split_lines(text);
    if (lines.empty()) throw FormatError("empty NDJSON document");
    NdjsonBody body{parse_json(lines[0]), {}};
    if (get_as<std::string>(body.header, "format") != "SDEU" || get_as<std::string>(body.header, "kind") != kind) {
        throw FormatError(std::string("NDJSON header is not an SDEU ") + kind);
    }
    for (std::size_t i = 1; i < lines.size(); ++i) body.lines.push_back(parse_json(lines[i]));
    return body;
}

void fill_rows(const Json& line, std::size_t horizon, std::size_t dims, double* out) {
    const Json& rows = field(line, "values");
    if (!rows.is_array() || rows.size() != horizon) throw FormatError("NDJSON sample has wrong number of steps");
    for (std::size_t h = 0; h < horizon; ++h) {
        if (!rows[h].is_array() || rows[h].size() != dims) throw FormatError("NDJSON step has wrong dimension");
        for (std::size_t d = 0; d < dims; ++d) out[h * dims + d] = rows[h][d].get<double>();
    }
}

}  // namespace

SampleSet sample_set_from_ndjson(std::string_view text) {
    const NdjsonBody body = parse_ndjson(text, "sample_set");
    SampleSet out(get_as<std::size_t>(body.header, "S"), get_as<std::size_t>(body.header, "H"),
                  get_as<std::size_t>(body.header, "D"), get_as<double>(body.header, "dt"));
    if (body.lines.size() != out.n_samples) throw FormatError("NDJSON sample count disagrees with header");
    for (std::size_t s = 0; s < out.n_samples; ++s) {
        fill_rows(body.lines[s], out.horizon, out.dims, out.values.data() + s * out.horizon * out.dims);
    }
    return out;
}

PathMatrix path_from_ndjson(std::string_view text) {
    const NdjsonBody body = parse_ndjson(text, "path");
    if (body.lines.size() != 1) throw FormatError("NDJSON path must hold one sample line");
    PathMatrix out;
    out.n_steps = get_as<std::size_t>(body.header, "H");
    out.dims = get_as<std::size_t>(body.header, "D");
    out.dt = get_as<double>(body.header, "dt");
    out.values.resize(out.n_steps * out.dims);
    fill_rows(body.lines[0], out.n_steps, out.dims, out.values.data());
    if (body.lines[0].contains("regimes")) {
        out.regime_trace = get_as<std::vector<std::uint8_t>>(body.lines[0], "regimes");
    }
    return out;
}

// ---- records ----

Bytes encode_record(const TrainingRecord& record) {
    const std::string spec = to_json(record.system_spec).dump();
    const Bytes history = encode_frame(record.history);
    const Bytes branches = encode_frame(record.future_branches);
    Bytes out;
    out.reserve(24 + spec.size() + history.size() + branches.size());
    put_u64(out, spec.size());
    out.insert(out.end(), spec.begin(), spec.end());
    put_u64(out, history.size());
    out.insert(out.end(), history.begin(), history.end());
    put_u64(out, branches.size());
    out.insert(out.end(), branches.begin(), branches.end());
    return out;
}

TrainingRecord decode_record(std::span<const std::uint8_t> bytes, std::size_t& offset) {
    Reader r(bytes, offset);
    TrainingRecord rec;

    const std::size_t spec_len = r.u64("spec length");
    const std::size_t spec_at = r.offset();
    const auto spec_bytes = r.take(spec_len, "spec block");
    try {
        rec.system_spec = spec_from_json(
            parse_json(std::string_view(reinterpret_cast<const char*>(spec_bytes.data()), spec_bytes.size())));
    } catch (const FormatError& e) {
        throw FormatError(std::string("spec block: ") + e.what(), spec_at);
    }

    const std::size_t hist_len = r.u64("history length");
    const std::size_t hist_at = r.offset();
    const auto hist = r.take(hist_len, "history frame");
    std::size_t local = 0;
    rec.history = decode_path(hist, local);
    if (local != hist_len) throw FormatError("history frame length disagrees with prefix", hist_at + local);

    const std::size_t br_len = r.u64("branches length");
    const std::size_t br_at = r.offset();
    const auto br = r.take(br_len, "branches frame");
    local = 0;
    rec.future_branches = decode_sample_set(br, local);
    if (local != br_len) throw FormatError("branches frame length disagrees with prefix", br_at + local);
    return rec;
}

std::vector<TrainingRecord> decode_records(std::span<const std::uint8_t> bytes) {
    std::vector<TrainingRecord> out;
    std::size_t offset = 0;
    while (offset < bytes.size()) out.push_back(decode_record(bytes, offset));
    return out;
}

// ---- files ----

Bytes read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    Bytes out((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) throw IoError("read failed for " + path.string());
    return out;
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed for " + path.string());
}

void write_text(const std::filesystem::path& path, std::string_view text) {
    write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

}  // namespace sdeu
