use supstar::geometry::ChartGeometry;
use supstar::scalars::GaussPoly;
use supstar::superalgebra::AlgebraElement;
use serde_json::json;

fn write(path: &str, v: serde_json::Value) {
    std::fs::write(path, serde_json::to_string_pretty(&v).unwrap() + "\n").unwrap();
    println!("wrote {path}");
}

fn main() {
    std::fs::create_dir_all("specs").unwrap();
    write("specs/darboux.json", ChartGeometry::darboux_trivial(1, 1).to_json());
    write("specs/curved.json", ChartGeometry::curved_example().to_json());
    let x = AlgebraElement::from_poly(&GaussPoly::var(2, 0), 1, 8);
    let p = AlgebraElement::from_poly(&GaussPoly::var(2, 1), 1, 8);
    write("specs/x.json", x.to_json());
    write("specs/p.json", p.to_json());
    write("specs/quantum_abelian.json", json!({
        "dim_m": 4,
        "structure": [
            [["0","0"],["0","0"]],
            [["0","0"],["0","0"]]
        ],
        "qmm": [
            [{"exps": [0,0,1,0], "re": "1", "im": "0"}],
            [{"exps": [0,0,0,1], "re": "1", "im": "0"}]
        ]
    }));
    write("specs/quantum_so2.json", json!({
        "dim_m": 2,
        "structure": [[["0"]]],
        "qmm": [[
            {"exps": [2,0], "re": "1/2", "im": "0"},
            {"exps": [0,2], "re": "1/2", "im": "0"}
        ]]
    }));
    write("specs/classical_abelian.json", json!({
        "dim_m": 4,
        "constraints": [
            [{"exps": [0,0,1,0], "re": "1", "im": "0"}],
            [{"exps": [0,0,0,1], "re": "1", "im": "0"}]
        ],
        "coord_change": {
            "forward": [
                [{"exps": [0,0,1,0], "re": "1", "im": "0"}],
                [{"exps": [0,0,0,1], "re": "1", "im": "0"}],
                [{"exps": [1,0,0,0], "re": "1", "im": "0"}],
                [{"exps": [0,1,0,0], "re": "1", "im": "0"}]
            ],
            "backward": [
                [{"exps": [0,0,1,0], "re": "1", "im": "0"}],
                [{"exps": [0,0,0,1], "re": "1", "im": "0"}],
                [{"exps": [1,0,0,0], "re": "1", "im": "0"}],
                [{"exps": [0,1,0,0], "re": "1", "im": "0"}]
            ]
        }
    }));
    write("specs/classical_twisted.json", json!({
        "dim_m": 4,
        "constraints": [
            [{"exps": [0,0,1,0], "re": "1", "im": "0"}],
            [{"exps": [0,0,0,1], "re": "1", "im": "0"},
             {"exps": [1,0,1,0], "re": "-1", "im": "0"}]
        ],
        "coord_change": {
            "forward": [
                [{"exps": [0,0,1,0], "re": "1", "im": "0"}],
                [{"exps": [0,0,0,1], "re": "1", "im": "0"},
                 {"exps": [1,0,1,0], "re": "-1", "im": "0"}],
                [{"exps": [1,0,0,0], "re": "1", "im": "0"}],
                [{"exps": [0,1,0,0], "re": "1", "im": "0"}]
            ],
            "backward": [
                [{"exps": [0,0,1,0], "re": "1", "im": "0"}],
                [{"exps": [0,0,0,1], "re": "1", "im": "0"}],
                [{"exps": [1,0,0,0], "re": "1", "im": "0"}],
                [{"exps": [0,1,0,0], "re": "1", "im": "0"},
                 {"exps": [1,0,1,0], "re": "1", "im": "0"}]
            ]
        }
    }));
}
