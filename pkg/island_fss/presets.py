"""Per-dataset hyperparameter rows used by the experiment command line."""

from pydantic import BaseModel, ConfigDict

from island_fss.algorithms import GaParams, PsoParams


class Preset(BaseModel):
    """Population sizes, generation budget and per-algorithm variation parameters."""

    model_config = ConfigDict(frozen=True)

    n: int
    local_n: int
    m_gen: int
    m_mig: int = 1
    nsga2: GaParams
    pso: PsoParams
    moead: GaParams

    def ga_for(self, algorithm: str) -> GaParams:
        return self.moead if algorithm == "moead" else self.nsga2


# total generations are run as a single migration round
PRESETS: dict[str, Preset] = {
    "epsilon": Preset(
        n=50,
        local_n=25,
        m_gen=50,
        nsga2=GaParams(pc=0.96, pm=0.03),
        pso=PsoParams(w=0.9, c1=0.7, c2=1.3),
        moead=GaParams(pc=0.95, pm=0.10),
    ),
    "ieee_malware": Preset(
        n=50,
        local_n=25,
        m_gen=50,
        nsga2=GaParams(pc=0.91, pm=0.05),
        pso=PsoParams(w=0.1, c1=0.6, c2=1.4),
        moead=GaParams(pc=0.95, pm=0.10),
    ),
    "ova_omentum": Preset(
        n=300,
        local_n=200,
        m_gen=100,
        nsga2=GaParams(pc=0.99, pm=0.0004),
        pso=PsoParams(w=0.9, c1=0.3, c2=1.7),
        moead=GaParams(pc=0.99, pm=0.006),
    ),
    "ova_uterus": Preset(
        n=300,
        local_n=200,
        m_gen=100,
        nsga2=GaParams(pc=0.99, pm=0.0007),
        pso=PsoParams(w=0.9, c1=0.5, c2=1.5),
        moead=GaParams(pc=0.99, pm=0.004),
    ),
    "ddos": Preset(
        n=20,
        local_n=10,
        m_gen=10,
        nsga2=GaParams(pc=0.95, pm=0.05),
        pso=PsoParams(w=0.9, c1=0.4, c2=1.6),
        moead=GaParams(pc=0.95, pm=0.05),
    ),
}

DEFAULT_PRESET = "ddos"
