#pragma once

#include <torch/torch.h>

#include <string>
#include <vector>

#include "radarcast/checkpoint.hpp"
#include "radarcast/error.hpp"
#include "radarcast/rng.hpp"

namespace radarcast::detail {

inline torch::Tensor tensor_from(const std::vector<float>& values, std::vector<std::int64_t> shape)
{
    return torch::from_blob(const_cast<float*>(values.data()), shape, torch::kFloat32).clone();
}

inline void fill_uniform(torch::Tensor& t, Rng& rng, double bound)
{
    std::vector<float> v(static_cast<std::size_t>(t.numel()));
    for (auto& x : v)
        x = static_cast<float>(rng.uniform(-bound, bound));
    torch::NoGradGuard guard;
    t.copy_(tensor_from(v, t.sizes().vec()));
}

inline void fill_normal(torch::Tensor& t, Rng& rng, double stddev)
{
    std::vector<float> v(static_cast<std::size_t>(t.numel()));
    for (auto& x : v)
        x = static_cast<float>(stddev * rng.normal());
    torch::NoGradGuard guard;
    t.copy_(tensor_from(v, t.sizes().vec()));
}

inline TensorRecord to_record(const std::string& name, const torch::Tensor& t)
{
    auto c = t.detach().to(torch::kCPU).to(torch::kFloat32).contiguous();
    TensorRecord r;
    r.name = name;
    r.shape = c.sizes().vec();
    r.data.assign(c.data_ptr<float>(), c.data_ptr<float>() + c.numel());
    return r;
}

inline void load_parameters(torch::nn::Module& module, const CheckpointContainer& ckpt)
{
    torch::NoGradGuard guard;
    for (auto& p : module.named_parameters()) {
        const auto& rec = ckpt.tensor(p.key());
        if (rec.shape != p.value().sizes().vec())
            throw FormatError("tensor '" + p.key() + "' has an unexpected shape");
        p.value().copy_(tensor_from(rec.data, rec.shape));
    }
}

inline std::vector<TensorRecord> parameter_records(const torch::nn::Module& module)
{
    std::vector<TensorRecord> out;
    for (const auto& p : module.named_parameters())
        out.push_back(to_record(p.key(), p.value()));
    return out;
}

inline std::vector<torch::Tensor> snapshot(const torch::nn::Module& module)
{
    std::vector<torch::Tensor> out;
    for (const auto& p : module.parameters())
        out.push_back(p.detach().clone());
    return out;
}

inline void restore(torch::nn::Module& module, const std::vector<torch::Tensor>& saved)
{
    torch::NoGradGuard guard;
    auto params = module.parameters();
    for (std::size_t i = 0; i < params.size(); ++i)
        params[i].copy_(saved[i]);
}

inline std::int64_t count_parameters(const torch::nn::Module& module)
{
    std::int64_t n = 0;
    for (const auto& p : module.parameters())
        n += p.numel();
    return n;
}

}  // namespace radarcast::detail
