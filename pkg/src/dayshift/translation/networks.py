"""Generator and patch discriminator for unpaired night-to-day translation.

Generator: 7x7 stride-1 input conv (3->ngf), two stride-2 downsampling
convs (ngf->2ngf->4ngf), R residual blocks at 4ngf channels, two stride-2
transposed convs back down, 7x7 output conv with tanh. Instance norm with
learnable per-channel gain/bias everywhere.

Discriminator: 70x70-receptive-field patch design. 4x4 convs
3->64->128->256->512->1 with leaky ReLU 0.2; the first three convs are
stride 2, the 512-channel conv and the final scoring conv are stride 1 so
a 256x256 input yields a 30x30 score map. Instance norm on all but the
first conv.
"""

import torch
import torch.nn as nn

from ..errors import ConfigError, NumericError, ShapeError

NORM_EPS = 1e-5
INIT_STD = 0.02


def instance_normalize(x, gain, bias, eps=NORM_EPS):
    """Standardize each channel of a [C, H, W] map over its own pixels."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    if x.dim() != 3 or x.shape[1] * x.shape[2] < 1:
        raise ShapeError(f"expected non-empty [C, H, W], got {tuple(x.shape)}")
    if not torch.isfinite(x).all():
        raise NumericError("non-finite input to instance_normalize")
    mean = x.mean(dim=(1, 2), keepdim=True)
    var = x.var(dim=(1, 2), unbiased=False, keepdim=True)
    normalized = (x - mean) / torch.sqrt(var + eps)
    return normalized * gain.view(-1, 1, 1) + bias.view(-1, 1, 1)


class ResidualBlock(nn.Module):
    def __init__(self, channels):
        super().__init__()
        self.body = nn.Sequential(
            nn.ReflectionPad2d(1),
            nn.Conv2d(channels, channels, 3),
            nn.InstanceNorm2d(channels, eps=NORM_EPS, affine=True),
            nn.ReLU(inplace=True),
            nn.ReflectionPad2d(1),
            nn.Conv2d(channels, channels, 3),
            nn.InstanceNorm2d(channels, eps=NORM_EPS, affine=True),
        )

    def forward(self, x):
        return x + self.body(x)


class Generator(nn.Module):
    def __init__(self, n_blocks=6, ngf=64):
        super().__init__()
        if n_blocks < 1:
            raise ConfigError(f"residual block count must be >= 1, got {n_blocks}")
        self.n_blocks = n_blocks
        self.ngf = ngf
        layers = [
            nn.ReflectionPad2d(3),
            nn.Conv2d(3, ngf, 7),
            nn.InstanceNorm2d(ngf, eps=NORM_EPS, affine=True),
            nn.ReLU(inplace=True),
            nn.Conv2d(ngf, ngf * 2, 3, stride=2, padding=1),
            nn.InstanceNorm2d(ngf * 2, eps=NORM_EPS, affine=True),
            nn.ReLU(inplace=True),
            nn.Conv2d(ngf * 2, ngf * 4, 3, stride=2, padding=1),
            nn.InstanceNorm2d(ngf * 4, eps=NORM_EPS, affine=True),
            nn.ReLU(inplace=True),
        ]
        layers += [ResidualBlock(ngf * 4) for _ in range(n_blocks)]
        layers += [
            nn.ConvTranspose2d(ngf * 4, ngf * 2, 3, stride=2, padding=1, output_padding=1),
            nn.InstanceNorm2d(ngf * 2, eps=NORM_EPS, affine=True),
            nn.ReLU(inplace=True),
            nn.ConvTranspose2d(ngf * 2, ngf, 3, stride=2, padding=1, output_padding=1),
            nn.InstanceNorm2d(ngf, eps=NORM_EPS, affine=True),
            nn.ReLU(inplace=True),
            nn.ReflectionPad2d(3),
            nn.Conv2d(ngf, 3, 7),
            nn.Tanh(),
        ]
        self.model = nn.Sequential(*layers)

    def forward(self, x):
        if x.shape[-1] % 4 or x.shape[-2] % 4:
            raise ShapeError(
                f"generator input H and W must be divisible by 4, got {tuple(x.shape)}"
            )
        return self.model(x)


class PatchDiscriminator(nn.Module):
    MIN_INPUT = 64

    def __init__(self, ndf=64):
        super().__init__()
        self.ndf = ndf
        self.model = nn.Sequential(
            nn.Conv2d(3, ndf, 4, stride=2, padding=1),
            nn.LeakyReLU(0.2, inplace=True),
            nn.Conv2d(ndf, ndf * 2, 4, stride=2, padding=1),
            nn.InstanceNorm2d(ndf * 2, eps=NORM_EPS, affine=True),
            nn.LeakyReLU(0.2, inplace=True),
            nn.Conv2d(ndf * 2, ndf * 4, 4, stride=2, padding=1),
            nn.InstanceNorm2d(ndf * 4, eps=NORM_EPS, affine=True),
            nn.LeakyReLU(0.2, inplace=True),
            nn.Conv2d(ndf * 4, ndf * 8, 4, stride=1, padding=1),
            nn.InstanceNorm2d(ndf * 8, eps=NORM_EPS, affine=True),
            nn.LeakyReLU(0.2, inplace=True),
            nn.Conv2d(ndf * 8, 1, 4, stride=1, padding=1),
        )

    def forward(self, x):
        if x.shape[-1] < self.MIN_INPUT or x.shape[-2] < self.MIN_INPUT:
            raise ShapeError(
                f"discriminator input must be at least {self.MIN_INPUT}px, got {tuple(x.shape)}"
            )
        return self.model(x)


def init_weights(module, generator):
    """Conv weights from N(0, 0.02); norm gains 1, all biases 0."""
    for m in module.modules():
        if isinstance(m, (nn.Conv2d, nn.ConvTranspose2d)):
            with torch.no_grad():
                m.weight.normal_(0.0, INIT_STD, generator=generator)
                if m.bias is not None:
                    m.bias.zero_()
        elif isinstance(m, nn.InstanceNorm2d) and m.affine:
            with torch.no_grad():
                m.weight.fill_(1.0)
                m.bias.zero_()


def build_translation_models(n_blocks, seed, ngf=64, ndf=64):
    """Build (G_ab, G_ba, D_a, D_b), deterministically initialized from seed."""
    if n_blocks < 1:
        raise ConfigError(f"residual block count must be >= 1, got {n_blocks}")
    rng = torch.Generator().manual_seed(seed)
    g_ab = Generator(n_blocks, ngf)
    g_ba = Generator(n_blocks, ngf)
    d_a = PatchDiscriminator(ndf)
    d_b = PatchDiscriminator(ndf)
    for model in (g_ab, g_ba, d_a, d_b):
        init_weights(model, rng)
    return g_ab, g_ba, d_a, d_b


def generator_forward(generator, image_tensor):
    """Run a generator on one ImageTensor, returning a [3, H, W] tensor."""
    x = torch.from_numpy(image_tensor.data).unsqueeze(0)
    with torch.no_grad():
        out = generator(x)
    return out.squeeze(0)


def discriminator_forward(discriminator, image_tensor):
    """Run a discriminator on one ImageTensor, returning the [1, h, w] score map."""
    x = torch.from_numpy(image_tensor.data).unsqueeze(0)
    with torch.no_grad():
        out = discriminator(x)
    return out.squeeze(0)
