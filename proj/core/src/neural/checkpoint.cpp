#include "epicast/neural/checkpoint.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "epicast/error.hpp"

namespace epicast::neural {

namespace {

constexpr int kFormatVersion = 1;

void expect_token(std::istream& in, const std::string& expected) {
    std::string token;
    if (!(in >> token) || token != expected) {
        throw Error(ErrorKind::MalformedHeader,
                    fmt::format("checkpoint: expected '{}', found '{}'", expected, token));
    }
}

template <typename T>
T read_value(std::istream& in, const char* what) {
    T value{};
    if (!(in >> value)) {
        throw Error(ErrorKind::MalformedHeader, fmt::format("checkpoint: cannot read {}", what));
    }
    return value;
}

}  // namespace

void write_checkpoint(std::ostream& out, const NetworkModel& model) {
    const auto& c = model.config;
    fmt::print(out, "epicast-network {}\n", kFormatVersion);
    fmt::print(out, "architecture {}\n", to_string(c.architecture));
    fmt::print(out, "config {} {} {} {} {} {} {:.17g} {} {}\n", c.n_s, c.n_n, c.n_f,
               c.kernel_size, c.pool_size, c.subsequences, c.learning_rate, c.epochs, c.seed);
    fmt::print(out, "scaling {}\n", model.scaling == Scaling::LastValue ? "last_value" : "none");
    fmt::print(out, "tensors {}\n", model.weights.size());
    for (const auto& t : model.weights) {
        fmt::print(out, "tensor {} {} {}\n", t.name, t.shape.size(), fmt::join(t.shape, " "));
        fmt::print(out, "{:.17g}\n", fmt::join(t.values, " "));
    }
    fmt::print(out, "end\n");
    if (!out) {
        throw Error(ErrorKind::IoFailure, "failed to write checkpoint");
    }
}

NetworkModel read_checkpoint(std::istream& in) {
    expect_token(in, "epicast-network");
    const int version = read_value<int>(in, "version");
    if (version != kFormatVersion) {
        throw Error(ErrorKind::MalformedHeader,
                    fmt::format("unsupported checkpoint version {}", version));
    }
    expect_token(in, "architecture");
    const auto arch_name = read_value<std::string>(in, "architecture");
    const auto arch = parse_architecture(arch_name);
    if (!arch) {
        throw Error(ErrorKind::MalformedHeader, "unknown architecture '" + arch_name + "'");
    }
    NetworkModel model;
    auto& c = model.config;
    c.architecture = *arch;
    expect_token(in, "config");
    c.n_s = read_value<std::size_t>(in, "n_s");
    c.n_n = read_value<std::size_t>(in, "n_n");
    c.n_f = read_value<std::size_t>(in, "n_f");
    c.kernel_size = read_value<std::size_t>(in, "kernel_size");
    c.pool_size = read_value<std::size_t>(in, "pool_size");
    c.subsequences = read_value<std::size_t>(in, "subsequences");
    c.learning_rate = read_value<double>(in, "learning_rate");
    c.epochs = read_value<std::size_t>(in, "epochs");
    c.seed = read_value<std::uint64_t>(in, "seed");
    expect_token(in, "scaling");
    const auto scaling = read_value<std::string>(in, "scaling");
    if (scaling == "last_value") {
        model.scaling = Scaling::LastValue;
    } else if (scaling == "none") {
        model.scaling = Scaling::None;
    } else {
        throw Error(ErrorKind::MalformedHeader, "unknown scaling '" + scaling + "'");
    }

    model.weights = parameter_layout(c);
    expect_token(in, "tensors");
    const auto count = read_value<std::size_t>(in, "tensor count");
    if (count != model.weights.size()) {
        throw Error(ErrorKind::ShapeMismatch,
                    fmt::format("checkpoint has {} tensors, configuration needs {}", count,
                                model.weights.size()));
    }
    for (auto& t : model.weights) {
        expect_token(in, "tensor");
        expect_token(in, t.name);
        const auto rank = read_value<std::size_t>(in, "rank");
        std::vector<std::size_t> shape(rank);
        for (auto& d : shape) d = read_value<std::size_t>(in, "dimension");
        if (shape != t.shape) {
            throw Error(ErrorKind::ShapeMismatch, "tensor '" + t.name + "' has the wrong shape");
        }
        for (auto& v : t.values) v = read_value<double>(in, "tensor value");
    }
    expect_token(in, "end");
    return model;
}

void save_checkpoint(const std::filesystem::path& path, const NetworkModel& model) {
    std::ofstream out(path);
    if (!out) {
        throw Error(ErrorKind::IoFailure, "cannot open '" + path.string() + "' for writing");
    }
    write_checkpoint(out, model);
}

NetworkModel load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorKind::IoFailure, "cannot open '" + path.string() + "'");
    }
    return read_checkpoint(in);
}

}  // namespace epicast::neural
