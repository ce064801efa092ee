from pybind11.setup_helpers import Pybind11Extension, build_ext
from setuptools import setup

ext = Pybind11Extension(
    "attacca._core",
    sources=[
        "bindings/module.cpp",
        "src/kernel.cpp",
        "src/likelihood.cpp",
        "src/score.cpp",
        "src/audio.cpp",
        "src/duration.cpp",
        "src/decoder.cpp",
        "src/calibration.cpp",
        "src/pipeline.cpp",
        "src/udp.cpp",
    ],
    include_dirs=["include", "/usr/include/eigen3"],
    libraries=["fftw3"],
    cxx_std=20,
)

setup(ext_modules=[ext], cmdclass={"build_ext": build_ext})
