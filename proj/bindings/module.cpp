// Copyright 2026 The evgassom authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "evgassom/classify.hpp"
#include "evgassom/config.hpp"
#include "evgassom/drift_sim.hpp"
#include "evgassom/events.hpp"
#include "evgassom/gassom.hpp"
#include "evgassom/image.hpp"
#include "evgassom/pipeline.hpp"
#include "evgassom/viz.hpp"

namespace py = pybind11;
using namespace evgassom;

namespace {

EventStream stream_from_arrays(py::array_t<std::uint64_t> t,
                               py::array_t<std::uint16_t> x,
                               py::array_t<std::uint16_t> y,
                               py::array_t<std::uint16_t> p,
                               SensorGeometry geometry) {
  auto tb = t.unchecked<1>();
  auto xb = x.unchecked<1>();
  auto yb = y.unchecked<1>();
  auto pb = p.unchecked<1>();
  if (tb.shape(0) != xb.shape(0) || tb.shape(0) != yb.shape(0) ||
      tb.shape(0) != pb.shape(0)) {
    fail(errc::length_mismatch, "event arrays must share one length");
  }
  std::vector<Event> events;
  events.reserve(static_cast<std::size_t>(tb.shape(0)));
  for (py::ssize_t i = 0; i < tb.shape(0); ++i) {
    events.push_back(Event{tb(i), xb(i), yb(i), pb(i)});
  }
  return EventStream(geometry, std::move(events));
}

py::dict stream_to_arrays(const EventStream& s) {
  const py::ssize_t n = static_cast<py::ssize_t>(s.size());
  py::array_t<std::uint64_t> t(n);
  py::array_t<std::uint16_t> x(n), y(n), p(n);
  auto tb = t.mutable_unchecked<1>();
  auto xb = x.mutable_unchecked<1>();
  auto yb = y.mutable_unchecked<1>();
  auto pb = p.mutable_unchecked<1>();
  for (py::ssize_t i = 0; i < n; ++i) {
    const Event& e = s.events()[static_cast<std::size_t>(i)];
    tb(i) = e.t;
    xb(i) = e.x;
    yb(i) = e.y;
    pb(i) = e.p;
  }
  py::dict d;
  d["t"] = t;
  d["x"] = x;
  d["y"] = y;
  d["p"] = p;
  return d;
}

py::array_t<double> bank_to_numpy(const SubspaceBank& bank) {
  py::array_t<double> out({bank.nodes(), bank.subspace_dim(), bank.dim()});
  auto ob = out.mutable_unchecked<3>();
  for (int r = 0; r < bank.nodes(); ++r) {
    for (int h = 0; h < bank.subspace_dim(); ++h) {
      auto col = bank.basis_vector(r, h);
      for (int d = 0; d < bank.dim(); ++d) ob(r, h, d) = col[d];
    }
  }
  return out;
}

GrayImage image_from_numpy(py::array_t<float, py::array::c_style |
                                                  py::array::forcecast> a) {
  auto ab = a.unchecked<2>();
  GrayImage img = make_image(static_cast<int>(ab.shape(1)),
                             static_cast<int>(ab.shape(0)));
  for (py::ssize_t yy = 0; yy < ab.shape(0); ++yy) {
    for (py::ssize_t xx = 0; xx < ab.shape(1); ++xx) {
      img.at(static_cast<int>(xx), static_cast<int>(yy)) = ab(yy, xx);
    }
  }
  return img;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "event-stream feature learning with subspace maps";
  m.attr("__version__") = EVGASSOM_VERSION;

  py::register_exception<Error>(m, "EvgassomError");

  py::class_<SensorGeometry>(m, "SensorGeometry")
      .def(py::init([](int w, int h, int p) {
             return SensorGeometry{static_cast<std::uint16_t>(w),
                                   static_cast<std::uint16_t>(h),
                                   static_cast<std::uint16_t>(p)};
           }),
           py::arg("width"), py::arg("height"), py::arg("num_types"))
      .def_readwrite("width", &SensorGeometry::width)
      .def_readwrite("height", &SensorGeometry::height)
      .def_readwrite("num_types", &SensorGeometry::num_types)
      .def("__eq__", [](const SensorGeometry& a, const SensorGeometry& b) {
        return a == b;
      });

  py::class_<EventStream>(m, "EventStream")
      .def(py::init(&stream_from_arrays), py::arg("t"), py::arg("x"),
           py::arg("y"), py::arg("p"), py::arg("geometry"))
      .def_property_readonly("geometry", &EventStream::geometry)
      .def("__len__", &EventStream::size)
      .def("arrays", &stream_to_arrays)
      .def("__eq__",
           [](const EventStream& a, const EventStream& b) { return a == b; });

  m.def("parse_native", [](py::bytes data) {
    std::string_view view = data;
    return parse_native(
        {reinterpret_cast<const std::uint8_t*>(view.data()), view.size()});
  });
  m.def("encode_native", [](const EventStream& s) {
    auto bytes = encode_native(s);
    return py::bytes(reinterpret_cast<const char*>(bytes.data()),
                     bytes.size());
  });
  m.def("parse_nmnist", [](py::bytes data, SensorGeometry geo) {
    std::string_view view = data;
    return parse_nmnist(
        {reinterpret_cast<const std::uint8_t*>(view.data()), view.size()},
        geo);
  });
  m.def("load_stream",
        [](const std::string& path) { return load_stream(path); });
  m.def("save_stream", &save_stream);

  py::class_<SubspaceBank>(m, "SubspaceBank")
      .def_property_readonly("nodes", &SubspaceBank::nodes)
      .def_property_readonly("dim", &SubspaceBank::dim)
      .def_property_readonly("subspace_dim", &SubspaceBank::subspace_dim)
      .def_property_readonly("lattice_side", &SubspaceBank::lattice_side)
      .def("bases", &bank_to_numpy)
      .def("serialize",
           [](const SubspaceBank& b) {
             auto bytes = b.serialize();
             return py::bytes(reinterpret_cast<const char*>(bytes.data()),
                              bytes.size());
           })
      .def_static("deserialize", [](py::bytes data) {
        std::string_view view = data;
        return SubspaceBank::deserialize(
            {reinterpret_cast<const std::uint8_t*>(view.data()), view.size()});
      })
      .def("__eq__",
           [](const SubspaceBank& a, const SubspaceBank& b) { return a == b; });

  m.def("init_bank", &init_bank, py::arg("num_nodes"), py::arg("dim"),
        py::arg("subspace_dim") = 2, py::arg("seed") = 0);
  m.def("response", [](const SubspaceBank& bank, std::vector<double> x) {
    return response(bank, x);
  });
  m.def("classify_event",
        [](const SubspaceBank& bank, std::vector<double> x) {
          return classify_event(bank, x);
        });
  m.def("transition_mix", &transition_mix);

  py::class_<LayerConfig>(m, "LayerConfig")
      .def(py::init<>())
      .def_readwrite("patch_width", &LayerConfig::patch_width)
      .def_readwrite("stride", &LayerConfig::stride)
      .def_readwrite("fire_threshold", &LayerConfig::fire_threshold)
      .def_readwrite("tau_f_us", &LayerConfig::tau_f_us)
      .def_readwrite("tau_s_us", &LayerConfig::tau_s_us)
      .def_readwrite("num_subspaces", &LayerConfig::num_subspaces)
      .def_readwrite("subspace_dim", &LayerConfig::subspace_dim)
      .def_readwrite("input_types", &LayerConfig::input_types)
      .def_property_readonly("dim", &LayerConfig::dim);

  py::class_<TrainSchedule>(m, "TrainSchedule")
      .def(py::init<>())
      .def_readwrite("lr0", &TrainSchedule::lr0)
      .def_readwrite("lr_final", &TrainSchedule::lr_final)
      .def_readwrite("sigma0", &TrainSchedule::sigma0)
      .def_readwrite("sigma_final", &TrainSchedule::sigma_final)
      .def_readwrite("kappa", &TrainSchedule::kappa)
      .def_readwrite("reset_gamma_at_boundaries",
                     &TrainSchedule::reset_gamma_at_boundaries)
      .def_readwrite("presentation_interval_us",
                     &TrainSchedule::presentation_interval_us);

  m.def(
      "train_network",
      [](const std::vector<LayerConfig>& configs, const EventStream& input,
         int epochs, std::uint64_t seed, const TrainSchedule& schedule) {
        return train_network(configs, input, epochs, seed, schedule);
      },
      py::arg("configs"), py::arg("input"), py::arg("epochs") = 1,
      py::arg("seed") = 0, py::arg("schedule") = TrainSchedule{});
  m.def("encode_network", &encode_network);
  m.def("encode_layer",
        [](const LayerConfig& config, const SubspaceBank& bank,
           const EventStream& input) { return encode_layer(config, bank, input); });

  py::class_<Histogram>(m, "Histogram")
      .def(py::init([](std::vector<double> bins, std::uint64_t total) {
             return Histogram{std::move(bins), total};
           }),
           py::arg("bins"), py::arg("total_events") = 1)
      .def_readwrite("bins", &Histogram::bins)
      .def_readwrite("total_events", &Histogram::total_events);

  m.def("histogram", &histogram);
  m.def("intersection_distance", &intersection_distance);
  m.def("concat_normalized", [](const std::vector<Histogram>& parts) {
    return concat_normalized(parts);
  });

  py::class_<LabeledSample>(m, "LabeledSample")
      .def(py::init([](Histogram h, std::string label) {
             return LabeledSample{std::move(h), std::move(label)};
           }),
           py::arg("feature"), py::arg("label"))
      .def_readwrite("feature", &LabeledSample::feature)
      .def_readwrite("label", &LabeledSample::label);

  m.def("nn_classify",
        [](const std::vector<LabeledSample>& training, const Histogram& q) {
          return nn_classify(training, q);
        });
  m.def("evaluate_fixed", &evaluate_fixed, py::arg("train"), py::arg("test"),
        py::arg("num_threads") = 1);
  m.def("evaluate_kfold", &evaluate_kfold, py::arg("samples"),
        py::arg("folds"), py::arg("seed") = 0, py::arg("num_threads") = 1);

  py::class_<EvalReport>(m, "EvalReport")
      .def_readonly("accuracy", &EvalReport::accuracy)
      .def_readonly("classes", &EvalReport::classes)
      .def_readonly("confusion", &EvalReport::confusion)
      .def_readonly("fold_accuracies", &EvalReport::fold_accuracies)
      .def_readonly("zero_feature_queries", &EvalReport::zero_feature_queries);

  py::class_<DriftParams>(m, "DriftParams")
      .def(py::init<>())
      .def_readwrite("diffusion_arcmin2_per_s",
                     &DriftParams::diffusion_arcmin2_per_s)
      .def_readwrite("step_dt_s", &DriftParams::step_dt_s)
      .def_readwrite("boundary", &DriftParams::boundary)
      .def_readwrite("pixels_per_degree", &DriftParams::pixels_per_degree)
      .def_readwrite("seed", &DriftParams::seed);

  py::class_<TrajectorySample>(m, "TrajectorySample")
      .def_readonly("t_s", &TrajectorySample::t_s)
      .def_readonly("x_arcmin", &TrajectorySample::x_arcmin)
      .def_readonly("y_arcmin", &TrajectorySample::y_arcmin);

  m.def("gen_drift_trajectory", &gen_drift_trajectory);

  py::class_<StimulusProgram>(m, "StimulusProgram")
      .def(py::init<>())
      .def_readwrite("presentation_interval_s",
                     &StimulusProgram::presentation_interval_s)
      .def_readwrite("rotate_fraction", &StimulusProgram::rotate_fraction)
      .def_readwrite("rotation_range_deg",
                     &StimulusProgram::rotation_range_deg)
      .def_readwrite("seed", &StimulusProgram::seed)
      .def("add_image", [](StimulusProgram& p, py::array_t<float> img) {
        p.images.push_back(image_from_numpy(img));
      });

  py::class_<DvsParams>(m, "DvsParams")
      .def(py::init<>())
      .def_readwrite("contrast_threshold", &DvsParams::contrast_threshold)
      .def_readwrite("sensor", &DvsParams::sensor)
      .def_readwrite("intensity_floor", &DvsParams::intensity_floor)
      .def_readwrite("background_rate_hz", &DvsParams::background_rate_hz)
      .def_readwrite("noise_seed", &DvsParams::noise_seed);

  m.def("render_events", &render_events, py::arg("program"),
        py::arg("trajectory"), py::arg("dvs"),
        py::arg("pixels_per_degree") = 40.0);

  m.def("load_network", &load_network);
  m.def("save_network", &save_network);
  m.def("load_network_config", &load_network_config);

  py::class_<NetworkConfig>(m, "NetworkConfig")
      .def(py::init<>())
      .def_readwrite("layers", &NetworkConfig::layers)
      .def_readwrite("train", &NetworkConfig::train);
}
