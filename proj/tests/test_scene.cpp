#include <doctest.h>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include <random>
#include <sstream>

#include "codemap/error.hpp"
#include "codemap/scene.hpp"

using namespace codemap;
using namespace codemap::scene;

namespace {

analysis::Corpus corpus_of(std::vector<std::pair<std::string, std::string>> files) {
  analysis::Corpus c = analysis::ingest_texts(std::move(files), analysis::IngestConfig{});
  for (auto& d : c.documents) d.size = 1.0;
  return c;
}

std::size_t count(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
  return n;
}

// Counts elements by name in a parsed XML tree.
std::size_t count_elements(const boost::property_tree::ptree& tree, const std::string& name) {
  std::size_t n = 0;
  for (const auto& [key, child] : tree) {
    if (key == name) ++n;
    n += count_elements(child, name);
  }
  return n;
}

MapScene small_scene() {
  static const analysis::Corpus corpus =
      corpus_of({{"ui/MenuAction.java", "menu action menu"}, {"db/QueryStore.java", "query store & <row>"}});
  static const std::vector<Point> positions{{0.3, 0.6}, {0.7, 0.4}};
  static const std::vector<double> sizes{1.0, 1.0};
  static const auto grid = terrain::build_elevation(positions, sizes, terrain::TerrainConfig{}, 64);
  SceneInputs in;
  in.positions = positions;
  in.corpus = &corpus;
  in.grid = &grid;
  in.size = 512;
  return compose_scene(in);
}

}  // namespace

TEST_CASE("layer names round-trip") {
  for (LayerKind k : kAllLayers) CHECK(parse_layer(to_string(k)) == k);
  CHECK_FALSE(parse_layer("terrain").has_value());
}

TEST_CASE("label placement") {
  terrain::TerrainConfig tc;
  SUBCASE("coincident equal labels keep the first path") {
    const auto corpus = corpus_of({{"a/Same.java", "alpha"}, {"b/Same.java", "beta"}});
    const std::vector<Point> pos{{0.5, 0.5}, {0.5, 0.5}};
    const std::vector<double> sizes{1.0, 1.0};
    const auto grid = terrain::build_elevation(pos, sizes, tc, 64);
    LabelOptions opt;
    opt.keyword_threshold = 2.0;  // no keyword labels
    const auto labels = place_labels(pos, corpus, grid, tc, opt);
    REQUIRE(labels.size() == 1);
    CHECK(labels[0].text == "Same");
    CHECK(labels[0].kind == LabelKind::Filename);
  }
  SUBCASE("single file gives a filename and a keyword label on its hill") {
    const auto corpus = corpus_of({{"src/Parser.java", "token token grammar"}});
    const std::vector<Point> pos{{0.5, 0.5}};
    const std::vector<double> sizes{1.0};
    const auto grid = terrain::build_elevation(pos, sizes, tc, 65);
    const auto labels = place_labels(pos, corpus, grid, tc, LabelOptions{});
    REQUIRE(labels.size() == 2);
    CHECK(labels[0].kind == LabelKind::Keyword);
    CHECK(labels[0].text == "TOKEN");
    CHECK(labels[1].kind == LabelKind::Filename);
    CHECK(labels[1].text == "Parser");
    CHECK(distance(labels[0].anchor, labels[1].anchor) < 2.0 * terrain::kernel_sigma(1.0, tc));
  }
  SUBCASE("max_labels of zero") {
    const auto corpus = corpus_of({{"a.java", "x"}});
    const std::vector<Point> pos{{0.5, 0.5}};
    const std::vector<double> sizes{1.0};
    const auto grid = terrain::build_elevation(pos, sizes, tc, 32);
    LabelOptions opt;
    opt.max_labels = 0;
    CHECK(place_labels(pos, corpus, grid, tc, opt).empty());
  }
  SUBCASE("random layouts never overlap and fonts stay in range") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<std::pair<std::string, std::string>> files;
    for (int i = 0; i < 60; ++i) files.push_back({"f/File" + std::to_string(i) + ".java", "word" + std::string(1, char('a' + i % 26))});
    auto corpus = corpus_of(files);
    std::vector<Point> pos;
    std::vector<double> sizes;
    for (auto& d : corpus.documents) {
      d.size = 0.05 + 2.0 * u(rng);
      sizes.push_back(d.size);
      pos.push_back({u(rng), u(rng)});
    }
    const auto grid = terrain::build_elevation(pos, sizes, tc, 96);
    const auto labels = place_labels(pos, corpus, grid, tc, LabelOptions{});
    CHECK(!labels.empty());
    for (std::size_t a = 0; a < labels.size(); ++a) {
      CHECK(labels[a].font_size >= 8.0);
      CHECK(labels[a].font_size <= 32.0);
      for (std::size_t b = a + 1; b < labels.size(); ++b) {
        CHECK_FALSE(label_box(labels[a], 1024.0).overlaps(label_box(labels[b], 1024.0)));
      }
    }
  }
}

TEST_CASE("heat decays by recency rank") {
  const std::vector<Visit> a{{1, 0}};
  const auto h1 = heat_layer(a);
  REQUIRE(h1.size() == 1);
  CHECK(h1[0].value == 1.0);

  const std::vector<Visit> ab{{1, 0}, {2, 1}};
  const auto h2 = heat_layer(ab);
  CHECK(h2[0].doc == 2);
  CHECK(h2[0].value == 1.0);
  CHECK(h2[1].doc == 1);
  CHECK(h2[1].value == doctest::Approx(0.8));

  const std::vector<Visit> aba{{1, 0}, {2, 1}, {1, 2}};
  const auto h3 = heat_layer(aba);
  REQUIRE(h3.size() == 2);
  CHECK(h3[0].doc == 1);
  CHECK(h3[0].value == 1.0);
  CHECK(h3[1].doc == 2);
  CHECK(h3[1].value == doctest::Approx(0.8));

  const std::vector<Visit> many{{1, 0}, {2, 1}, {3, 2}, {4, 3}, {5, 4}};
  const auto h4 = heat_layer(many);
  for (std::size_t k = 1; k < h4.size(); ++k) {
    CHECK(h4[k].value < h4[k - 1].value);
    CHECK(h4[k].value > 0.0);
  }
}

TEST_CASE("flow maps") {
  SUBCASE("one target") {
    const std::vector<Point> t{{0.9, 0.9}};
    const auto tree = flow_map({0.1, 0.1}, t);
    REQUIRE(tree.edges.size() == 1);
    CHECK(tree.edges[0].thickness == 1);
    CHECK(tree.nodes[tree.edges[0].to].at == Point{0.9, 0.9});
  }
  SUBCASE("two coincident targets") {
    const std::vector<Point> t{{0.6, 0.4}, {0.6, 0.4}};
    const auto tree = flow_map({0.1, 0.1}, t);
    REQUIRE(tree.edges.size() == 3);
    CHECK(tree.edges[0].from == 0);
    CHECK(tree.edges[0].thickness == 2);
    CHECK(tree.nodes[tree.edges[0].to].at == Point{0.6, 0.4});
    for (std::size_t k = 1; k < 3; ++k) {
      CHECK(tree.edges[k].thickness == 1);
      CHECK(distance(tree.nodes[tree.edges[k].from].at, tree.nodes[tree.edges[k].to].at) == 0.0);
    }
  }
  SUBCASE("thickness equals leaves beneath every edge") {
    std::mt19937_64 rng(32);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<Point> t(17);
    for (Point& p : t) p = {u(rng), u(rng)};
    const auto tree = flow_map({0.5, 0.5}, t);
    CHECK(tree.leaf_count() == 17);
    CHECK(tree.edges.size() == tree.nodes.size() - 1);
    for (const FlowEdge& e : tree.edges) {
      std::uint32_t leaves = 0;
      std::vector<std::size_t> stack{e.to};
      while (!stack.empty()) {
        const auto k = stack.back();
        stack.pop_back();
        if (tree.nodes[k].target) ++leaves;
        for (const FlowEdge& f : tree.edges) {
          if (f.from == k) stack.push_back(f.to);
        }
      }
      CHECK(e.thickness == leaves);
    }
  }
  SUBCASE("clustered targets use less ink than a star") {
    std::mt19937_64 rng(33);
    std::normal_distribution<double> jitter(0.0, 0.03);
    const std::vector<Point> t{{0.8 + jitter(rng), 0.8 + jitter(rng)}, {0.82 + jitter(rng), 0.75 + jitter(rng)},
                               {0.2 + jitter(rng), 0.85 + jitter(rng)}, {0.22 + jitter(rng), 0.8 + jitter(rng)}};
    const Point source{0.5, 0.1};
    double star = 0.0;
    for (const Point& p : t) star += distance(source, p);
    CHECK(flow_map(source, t).ink() < star);
  }
  SUBCASE("no targets") {
    CHECK_THROWS_AS(flow_map({0, 0}, {}), InputError);
  }
}

TEST_CASE("overlays") {
  const auto two = overlay_layer({{0, 0.0}, {1, 1.0}}, Palette::Sequential);
  REQUIRE(two.entries.size() == 2);
  CHECK(two.entries[0].t == 0.0);
  CHECK(two.entries[0].color == image::to_hex(palette_color(Palette::Sequential, 0.0)));
  CHECK(two.entries[1].t == 1.0);
  CHECK(two.entries[0].color == "#ffffb2");
  CHECK(two.entries[1].color == "#bd0026");

  const auto one = overlay_layer({{3, 7.0}}, Palette::Diverging);
  CHECK(one.entries[0].t == 0.5);
  CHECK(one.entries[0].color == "#f7f7f7");

  CHECK(overlay_layer({}, Palette::Sequential).entries.empty());
  CHECK_THROWS_AS(overlay_layer({{0, std::nan("")}}, Palette::Sequential), InputError);
  CHECK(parse_palette("diverging") == Palette::Diverging);
  CHECK_FALSE(parse_palette("rainbow").has_value());
}

TEST_CASE("scene layers are complete and ordered") {
  const MapScene scene = small_scene();
  REQUIRE(scene.layers.size() == 7);
  for (std::size_t k = 0; k < 7; ++k) CHECK(scene.layers[k].kind == kAllLayers[k]);
  const std::vector<LayerKind> none;
  MapScene copy = scene;
  copy.set_visible(none);
  CHECK(copy.layer(LayerKind::Landscape).visible);
  CHECK_FALSE(copy.layer(LayerKind::Labels).visible);
}

TEST_CASE("svg rendering") {
  MapScene scene = small_scene();
  SUBCASE("landscape only") {
    const std::vector<LayerKind> keep{LayerKind::Landscape};
    scene.set_visible(keep);
    const auto svg = render_svg(scene);
    CHECK(count(svg, "<image") == 1);
    CHECK(count(svg, "<path") == 0);
    CHECK(count(svg, "<text") == 0);
  }
  SUBCASE("one path per contour polyline") {
    std::vector<terrain::Polyline> lines(3);
    for (auto& l : lines) l.points = {{0.1, 0.1}, {0.2, 0.2}};
    scene.layer(LayerKind::Contours).payload = lines;
    CHECK(count(render_svg(scene), "<path class=\"contour\"") == 3);
  }
  SUBCASE("deterministic bytes and well-formed XML with every layer populated") {
    scene.layer(LayerKind::Markers).payload = std::vector<Marker>{{0, {0.3, 0.6}, "#e41a1c", "ana <ui>"}};
    scene.layer(LayerKind::Heat).payload = std::vector<HeatSpot>{{0, {0.3, 0.6}, 1.0, 0.05}};
    auto overlay = overlay_layer({{0, 1.0}, {1, 2.0}}, Palette::Sequential);
    const std::vector<Point> pos{{0.3, 0.6}, {0.7, 0.4}};
    const std::vector<double> sizes{1.0, 1.0};
    locate_overlay(overlay, pos, sizes, terrain::TerrainConfig{});
    scene.layer(LayerKind::Overlay).payload = overlay;
    const std::vector<Point> targets{{0.3, 0.6}};
    scene.layer(LayerKind::Arrows).payload = Arrows{{flow_map({0.7, 0.4}, targets)}};
    const auto svg = render_svg(scene);
    CHECK(svg == render_svg(scene));

    boost::property_tree::ptree tree;
    std::istringstream in(svg);
    CHECK_NOTHROW(boost::property_tree::read_xml(in, tree));
    CHECK(count_elements(tree, "image") == 1);
    CHECK(count_elements(tree, "g") == 7);
    CHECK(count_elements(tree, "circle") == 4);
    CHECK(count(svg, "class=\"arrow\"") == 1);
    CHECK(count(svg, "ana &lt;ui&gt;") == 1);
  }
}

TEST_CASE("landscape colours water and land") {
  terrain::ElevationGrid g;
  g.width = 2;
  g.height = 1;
  g.cell = 1.0;
  g.h = {0.0, 1.0};
  const std::vector<double> shade{0.0, std::sqrt(0.5)};
  const auto rgba = landscape_rgba(g, shade);
  CHECK(image::Rgb{rgba[0], rgba[1], rgba[2]} == image::parse_hex("#9cc3dc"));
  CHECK(image::Rgb{rgba[4], rgba[5], rgba[6]} == image::parse_hex("#f4efe8"));
  CHECK(rgba[3] == 255);
}
