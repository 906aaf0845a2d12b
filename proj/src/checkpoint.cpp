#include "stochdef/checkpoint.hpp"

#include "stochdef/tensor_io.hpp"

#include <json.hpp>

#include <fstream>
#include <stdexcept>

namespace stochdef {

namespace {

struct TensorRole {
    const char* role;
    const char* file;
};

constexpr TensorRole kRoles[] = {
    {"dense1.weight", "w1.stdb"},
    {"dense1.bias", "b1.stdb"},
    {"dense2.weight", "w2.stdb"},
    {"dense2.bias", "b2.stdb"},
};

ImageTensor as_matrix(const std::vector<double>& values, int rows, int cols) {
    return ImageTensor(Shape{rows, cols, 1}, values);
}

} // namespace

void save_checkpoint(const std::filesystem::path& dir, const ClassifierParams& params) {
    params.validate();
    std::filesystem::create_directories(dir);
    const int in = params.input_size();
    const std::pair<int, int> shapes[] = {
        {params.hidden_width, in}, {1, params.hidden_width}, {params.num_classes, params.hidden_width}, {1, params.num_classes}};
    const std::vector<double>* tensors[] = {&params.w1, &params.b1, &params.w2, &params.b2};

    nlohmann::json manifest;
    manifest["format"] = "stochdef-checkpoint";
    manifest["version"] = 1;
    manifest["input_shape"] = {params.input_shape.height, params.input_shape.width, params.input_shape.channels};
    manifest["hidden_width"] = params.hidden_width;
    manifest["num_classes"] = params.num_classes;
    manifest["tensors"] = nlohmann::json::array();
    for (std::size_t i = 0; i < 4; ++i) {
        save_tensors(dir / kRoles[i].file, {as_matrix(*tensors[i], shapes[i].first, shapes[i].second)});
        manifest["tensors"].push_back(
            {{"role", kRoles[i].role}, {"file", kRoles[i].file}, {"shape", {shapes[i].first, shapes[i].second}}});
    }
    std::ofstream out(dir / "manifest.json");
    if (!out) {
        throw std::runtime_error("cannot write checkpoint manifest in " + dir.string());
    }
    out << manifest.dump(2) << "\n";
}

ClassifierParams load_checkpoint(const std::filesystem::path& dir) {
    std::ifstream in(dir / "manifest.json");
    if (!in) {
        throw std::runtime_error("checkpoint: missing manifest.json in " + dir.string());
    }
    const nlohmann::json manifest = nlohmann::json::parse(in);
    if (manifest.value("format", "") != "stochdef-checkpoint") {
        throw std::runtime_error("checkpoint: unrecognized manifest format in " + dir.string());
    }
    const auto& shape = manifest.at("input_shape");
    ClassifierParams p = ClassifierParams::zeros(Shape{shape.at(0).get<int>(), shape.at(1).get<int>(), shape.at(2).get<int>()},
                                                 manifest.at("hidden_width").get<int>(),
                                                 manifest.at("num_classes").get<int>());
    std::vector<double>* targets[] = {&p.w1, &p.b1, &p.w2, &p.b2};
    for (const auto& entry : manifest.at("tensors")) {
        const std::string role = entry.at("role").get<std::string>();
        std::size_t slot = 4;
        for (std::size_t i = 0; i < 4; ++i) {
            if (role == kRoles[i].role) {
                slot = i;
            }
        }
        if (slot == 4) {
            throw std::runtime_error("checkpoint: unknown tensor role '" + role + "'");
        }
        const auto records = load_tensors(dir / entry.at("file").get<std::string>());
        if (records.size() != 1 || records.front().size() != targets[slot]->size()) {
            throw std::runtime_error("checkpoint: tensor '" + role + "' has the wrong size");
        }
        targets[slot]->assign(records.front().values().begin(), records.front().values().end());
    }
    p.validate();
    return p;
}

} // namespace stochdef
