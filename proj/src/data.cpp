#include "pusmi/data.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>
#include <string_view>

namespace pusmi {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

bool parse_double(std::string_view s, double& out) {
    s = trim(s);
    if (s.empty()) return false;
    // from_chars rejects a leading '+'
    if (s.front() == '+') s.remove_prefix(1);
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size();
}

bool parse_index(std::string_view s, long& out) {
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size();
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= s.size(); ++i) {
        if (i == s.size() || s[i] == sep) {
            out.push_back(s.substr(start, i - start));
            start = i + 1;
        }
    }
    return out;
}

int to_label(double raw) { return raw > 0.0 ? 1 : -1; }

}  // namespace

std::size_t LabeledDataset::count(int label) const {
    return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), label));
}

Matrix LabeledDataset::rows_with(int label) const {
    Matrix out(static_cast<Eigen::Index>(count(label)), features.cols());
    Eigen::Index r = 0;
    for (std::size_t i = 0; i < labels.size(); ++i)
        if (labels[i] == label) out.row(r++) = features.row(static_cast<Eigen::Index>(i));
    return out;
}

void LabeledDataset::validate() const {
    if (static_cast<Eigen::Index>(labels.size()) != features.rows())
        throw ShapeError("label count " + std::to_string(labels.size()) + " != feature rows " +
                         std::to_string(features.rows()));
    for (int y : labels)
        if (y != 1 && y != -1) throw PreconditionError("labels must be +1 or -1");
}

PuDataset::PuDataset(Matrix p, Matrix u) : positives(std::move(p)), unlabeled(std::move(u)) {
    if (positives.cols() != unlabeled.cols())
        throw ShapeError("positive dim " + std::to_string(positives.cols()) + " != unlabeled dim " +
                         std::to_string(unlabeled.cols()));
}

void PuDataset::require_nonempty() const {
    require(n_p() >= 1, "PU data needs at least one positive sample");
    require(n_u() >= 1, "PU data needs at least one unlabeled sample");
    require(dim() >= 1, "PU data needs at least one feature");
}

void GaussianMixtureSpec::validate() const {
    if (mean_pos.size() != mean_neg.size() || mean_pos.size() != cov_diag.size())
        throw ShapeError("mixture spec vectors must share one dimension");
    require(mean_pos.size() >= 1, "mixture spec needs d >= 1");
    require((cov_diag.array() > 0.0).all(), "covariance diagonal must be strictly positive");
}

GaussianMixtureSpec GaussianMixtureSpec::toy(double theta_p) {
    GaussianMixtureSpec s;
    s.mean_pos = Vector::Zero(2);
    s.mean_pos(0) = -1.0;
    s.mean_neg = Vector::Zero(2);
    s.mean_neg(0) = 1.0;
    s.cov_diag = Vector(2);
    s.cov_diag << 0.5, 3.5;
    s.prior = ClassPrior(theta_p);
    return s;
}

GaussianMixtureSpec GaussianMixtureSpec::null_toy(double theta_p) {
    GaussianMixtureSpec s = toy(theta_p);
    s.mean_pos = s.mean_neg;
    return s;
}

// ---- LIBSVM ----------------------------------------------------------------

LabeledDataset read_libsvm(std::istream& in) {
    struct Row {
        int label;
        std::vector<std::pair<long, double>> entries;
    };
    std::vector<Row> rows;
    long max_index = 0;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view view = trim(line);
        if (auto hash = view.find('#'); hash != std::string_view::npos) view = trim(view.substr(0, hash));
        if (view.empty()) continue;

        std::istringstream tokens{std::string(view)};
        std::string tok;
        tokens >> tok;
        double raw_label = 0.0;
        if (!parse_double(tok, raw_label)) throw ParseError("bad label '" + tok + "'", line_no);
        Row row{to_label(raw_label), {}};
        long prev = 0;
        while (tokens >> tok) {
            const auto colon = tok.find(':');
            if (colon == std::string::npos) throw ParseError("expected idx:val, got '" + tok + "'", line_no);
            long idx = 0;
            double val = 0.0;
            if (!parse_index(std::string_view(tok).substr(0, colon), idx) || idx < 1)
                throw ParseError("bad feature index in '" + tok + "'", line_no);
            if (!parse_double(std::string_view(tok).substr(colon + 1), val))
                throw ParseError("bad feature value in '" + tok + "'", line_no);
            if (idx <= prev) throw ParseError("feature indices must be strictly ascending", line_no);
            prev = idx;
            row.entries.emplace_back(idx, val);
        }
        max_index = std::max(max_index, prev);
        rows.push_back(std::move(row));
    }

    LabeledDataset out;
    out.features = Matrix::Zero(static_cast<Eigen::Index>(rows.size()), max_index);
    out.labels.reserve(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        out.labels.push_back(rows[r].label);
        for (auto [idx, val] : rows[r].entries) out.features(static_cast<Eigen::Index>(r), idx - 1) = val;
    }
    return out;
}

LabeledDataset load_libsvm(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw PreconditionError("cannot open " + path.string());
    return read_libsvm(in);
}

void write_libsvm(std::ostream& out, const LabeledDataset& data) {
    data.validate();
    const auto old_precision = out.precision(std::numeric_limits<double>::max_digits10);
    for (Eigen::Index i = 0; i < data.size(); ++i) {
        out << (data.labels[static_cast<std::size_t>(i)] > 0 ? "+1" : "-1");
        for (Eigen::Index j = 0; j < data.dim(); ++j)
            if (data.features(i, j) != 0.0) out << ' ' << (j + 1) << ':' << data.features(i, j);
        out << '\n';
    }
    out.precision(old_precision);
}

// ---- CSV -------------------------------------------------------------------

LabeledDataset read_csv(std::istream& in) {
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t line_no = 0;
    std::size_t width = 0;
    std::size_t label_col = 0;
    bool have_layout = false;

    while (std::getline(in, line)) {
        ++line_no;
        std::string_view view = trim(line);
        if (view.empty()) continue;
        auto cells = split(view, ',');
        std::vector<double> values(cells.size());
        bool numeric = true;
        for (std::size_t c = 0; c < cells.size(); ++c) numeric = numeric && parse_double(cells[c], values[c]);

        if (!have_layout) {
            width = cells.size();
            label_col = width - 1;
            have_layout = true;
            if (!numeric) {
                for (std::size_t c = 0; c < cells.size(); ++c)
                    if (trim(cells[c]) == "y") label_col = c;
                continue;
            }
        }
        if (!numeric) throw ParseError("non-numeric cell", line_no);
        if (cells.size() != width)
            throw ParseError("expected " + std::to_string(width) + " cells, got " + std::to_string(cells.size()),
                             line_no);
        rows.push_back(std::move(values));
    }
    if (have_layout && width < 2) throw ParseError("CSV needs a label column and at least one feature", 1);

    LabeledDataset out;
    const auto d = have_layout ? static_cast<Eigen::Index>(width - 1) : 0;
    out.features = Matrix::Zero(static_cast<Eigen::Index>(rows.size()), d);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        Eigen::Index j = 0;
        for (std::size_t c = 0; c < width; ++c) {
            if (c == label_col)
                out.labels.push_back(to_label(rows[r][c]));
            else
                out.features(static_cast<Eigen::Index>(r), j++) = rows[r][c];
        }
    }
    return out;
}

LabeledDataset load_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw PreconditionError("cannot open " + path.string());
    return read_csv(in);
}

LabeledDataset load_labeled(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) throw PreconditionError("input file not found: " + path.string());
    return path.extension() == ".csv" ? load_csv(path) : load_libsvm(path);
}

// ---- sampling --------------------------------------------------------------

PuDataset make_pu(const LabeledDataset& data, Eigen::Index n_p, Eigen::Index n_u, ClassPrior prior,
                  std::uint64_t seed) {
    data.validate();
    require(n_p >= 1, "make_pu: n_p must be >= 1");
    require(n_u >= 1, "make_pu: n_u must be >= 1");

    std::vector<Eigen::Index> pos_rows, neg_rows;
    for (std::size_t i = 0; i < data.labels.size(); ++i)
        (data.labels[i] > 0 ? pos_rows : neg_rows).push_back(static_cast<Eigen::Index>(i));

    Rng coin_rng = make_rng(seed, 0);
    std::bernoulli_distribution coin(prior.theta_p());
    std::vector<bool> draw_positive(static_cast<std::size_t>(n_u));
    Eigen::Index u_pos = 0;
    for (auto&& flag : draw_positive) {
        flag = coin(coin_rng);
        u_pos += flag ? 1 : 0;
    }
    const Eigen::Index u_neg = n_u - u_pos;

    const auto n_pos = static_cast<Eigen::Index>(pos_rows.size());
    const auto n_neg = static_cast<Eigen::Index>(neg_rows.size());
    if (n_p + u_pos > n_pos)
        throw CapacityError("positive class too small: need " + std::to_string(n_p + u_pos) + ", have " +
                            std::to_string(n_pos));
    if (u_neg > n_neg)
        throw CapacityError("negative class too small: need " + std::to_string(u_neg) + ", have " +
                            std::to_string(n_neg));

    Rng pos_rng = make_rng(seed, 1);
    Rng neg_rng = make_rng(seed, 2);
    std::shuffle(pos_rows.begin(), pos_rows.end(), pos_rng);
    std::shuffle(neg_rows.begin(), neg_rows.end(), neg_rng);

    Matrix p(n_p, data.dim());
    for (Eigen::Index i = 0; i < n_p; ++i) p.row(i) = data.features.row(pos_rows[static_cast<std::size_t>(i)]);

    Matrix u(n_u, data.dim());
    std::size_t next_pos = static_cast<std::size_t>(n_p);
    std::size_t next_neg = 0;
    for (Eigen::Index k = 0; k < n_u; ++k) {
        const Eigen::Index src =
            draw_positive[static_cast<std::size_t>(k)] ? pos_rows[next_pos++] : neg_rows[next_neg++];
        u.row(k) = data.features.row(src);
    }
    return PuDataset(std::move(p), std::move(u));
}

namespace {

void fill_gaussian_row(Eigen::Ref<Vector> dst, const Vector& mean, const Vector& sd, Rng& rng) {
    std::normal_distribution<double> z(0.0, 1.0);
    for (Eigen::Index j = 0; j < mean.size(); ++j) dst(j) = mean(j) + sd(j) * z(rng);
}

}  // namespace

PuDataset sample_gaussian_pu(const GaussianMixtureSpec& spec, Eigen::Index n_p, Eigen::Index n_u,
                             std::uint64_t seed) {
    spec.validate();
    require(n_p >= 1, "sample_gaussian_pu: n_p must be >= 1");
    require(n_u >= 1, "sample_gaussian_pu: n_u must be >= 1");
    const Vector sd = spec.cov_diag.array().sqrt();
    const Eigen::Index d = spec.dim();

    Rng p_rng = make_rng(seed, 10);
    Matrix p(n_p, d);
    Vector row(d);
    for (Eigen::Index i = 0; i < n_p; ++i) {
        fill_gaussian_row(row, spec.mean_pos, sd, p_rng);
        p.row(i) = row.transpose();
    }

    Rng u_rng = make_rng(seed, 11);
    std::bernoulli_distribution coin(spec.prior.theta_p());
    Matrix u(n_u, d);
    for (Eigen::Index k = 0; k < n_u; ++k) {
        const bool positive = coin(u_rng);
        fill_gaussian_row(row, positive ? spec.mean_pos : spec.mean_neg, sd, u_rng);
        u.row(k) = row.transpose();
    }
    return PuDataset(std::move(p), std::move(u));
}

LabeledDataset sample_gaussian_labeled(const GaussianMixtureSpec& spec, Eigen::Index n, std::uint64_t seed) {
    spec.validate();
    require(n >= 0, "sample size must be non-negative");
    const Vector sd = spec.cov_diag.array().sqrt();
    Rng rng = make_rng(seed, 12);
    std::bernoulli_distribution coin(spec.prior.theta_p());
    LabeledDataset out;
    out.features.resize(n, spec.dim());
    out.labels.reserve(static_cast<std::size_t>(n));
    Vector row(spec.dim());
    for (Eigen::Index i = 0; i < n; ++i) {
        const bool positive = coin(rng);
        fill_gaussian_row(row, positive ? spec.mean_pos : spec.mean_neg, sd, rng);
        out.features.row(i) = row.transpose();
        out.labels.push_back(positive ? 1 : -1);
    }
    return out;
}

LabeledDataset resample_labeled(const LabeledDataset& data, Eigen::Index n, ClassPrior prior,
                                std::uint64_t seed) {
    data.validate();
    std::vector<Eigen::Index> pos_rows, neg_rows;
    for (std::size_t i = 0; i < data.labels.size(); ++i)
        (data.labels[i] > 0 ? pos_rows : neg_rows).push_back(static_cast<Eigen::Index>(i));
    if (pos_rows.empty()) throw CapacityError("positive class is empty");
    if (neg_rows.empty()) throw CapacityError("negative class is empty");

    Rng rng = make_rng(seed, 13);
    std::bernoulli_distribution coin(prior.theta_p());
    std::uniform_int_distribution<std::size_t> pick_pos(0, pos_rows.size() - 1);
    std::uniform_int_distribution<std::size_t> pick_neg(0, neg_rows.size() - 1);
    LabeledDataset out;
    out.features.resize(n, data.dim());
    for (Eigen::Index i = 0; i < n; ++i) {
        const bool positive = coin(rng);
        const Eigen::Index src = positive ? pos_rows[pick_pos(rng)] : neg_rows[pick_neg(rng)];
        out.features.row(i) = data.features.row(src);
        out.labels.push_back(positive ? 1 : -1);
    }
    return out;
}

// ---- scaling ---------------------------------------------------------------

MinMaxScaler MinMaxScaler::fit(const Matrix& x) {
    require(x.rows() >= 1, "scaler needs at least one row");
    MinMaxScaler s;
    s.lo_ = x.colwise().minCoeff().transpose();
    s.hi_ = x.colwise().maxCoeff().transpose();
    return s;
}

Matrix MinMaxScaler::transform(const Matrix& x) const {
    if (x.cols() != lo_.size()) throw ShapeError("scaler dimension mismatch");
    Matrix out(x.rows(), x.cols());
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        const double span = hi_(j) - lo_(j);
        if (span > 0.0)
            out.col(j) = (x.col(j).array() - lo_(j)) / span;
        else
            out.col(j).setZero();
    }
    return out;
}

PuDataset MinMaxScaler::transform(const PuDataset& data) const {
    return PuDataset(transform(data.positives), transform(data.unlabeled));
}

}  // namespace pusmi
