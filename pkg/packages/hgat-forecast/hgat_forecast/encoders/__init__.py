from hgat_forecast.encoders.encoder import EncodedScene, SceneEncoder
