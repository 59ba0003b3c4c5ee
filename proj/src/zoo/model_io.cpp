#include "amga/zoo/model_io.hpp"

#include "amga/util/tensor_file.hpp"

namespace amga::zoo {

std::string encode_model(const ModelRecord& record)
{
    check_weights(record.arch, record.weights);
    nlohmann::json header = record.arch;
    header["train_seed"] = record.train_seed;
    header["clean_accuracy"] = record.clean_accuracy;
    return util::encode_tensor_file(kWeightMagic, header, record.weights);
}

ModelRecord decode_model(std::string_view bytes)
{
    auto file = util::decode_tensor_file(kWeightMagic, bytes);
    ModelRecord r;
    try {
        r.arch = file.header.get<ArchDescriptor>();
        r.train_seed = file.header.at("train_seed").get<std::uint64_t>();
        r.clean_accuracy = file.header.at("clean_accuracy").get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("malformed model header: ") + e.what());
    } catch (const ConfigError& e) {
        throw ParseError(std::string("malformed model header: ") + e.what());
    }
    r.weights = std::move(file.tensors);
    try {
        r.arch.validate();
        check_weights(r.arch, r.weights);
    } catch (const ConfigError& e) {
        throw ParseError(e.what());
    }
    return r;
}

void save_model(const ModelRecord& record, const std::filesystem::path& path)
{
    util::write_file(path, encode_model(record));
}

ModelRecord load_model(const std::filesystem::path& path)
{
    return decode_model(util::read_file(path));
}

} // namespace amga::zoo
