#include "neurotree/primitives/stub_pretraining.hpp"

#include "neurotree/nn/train.hpp"

namespace neurotree::primitives {

std::vector<nn::Tensor<float>> pretrain_stub(gp::Pretrained kind, const DataPair& data,
                                             const StubPretraining& options)
{
    if (data.instance_shape().size() != 3 || data.instance_shape()[2] != nn::kStubChannels) {
        throw std::invalid_argument("stub pretraining needs (H, W, 3) images");
    }
    LayerParams params;
    params.pretrained = kind;
    const LayerTree layers = layer_primitive_apply(LayerKind::PretrainedStub, input_tree(), params);

    nn::CompileOptions copts;
    copts.seed = options.seed;
    auto net = nn::compile<float>(layers, data.instance_shape(), data.n_classes, copts);

    nn::TrainConfig cfg;
    cfg.batch_size = options.batch_size;
    cfg.max_epochs = options.epochs;
    cfg.patience = options.epochs;
    nn::train(net, data.train, data.validation, cfg, options.seed);

    const auto shapes = nn::stub_tensor_shapes(kind);
    const auto parameters = net.parameters();
    std::vector<nn::Tensor<float>> out;
    for (std::size_t i = 0; i < shapes.size(); ++i) {
        nn::Tensor<float> t = parameters.at(i)->value;
        t.dims = shapes[i];
        out.push_back(std::move(t));
    }
    return out;
}

} // namespace neurotree::primitives
